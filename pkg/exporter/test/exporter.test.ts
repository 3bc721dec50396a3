import { execFileSync, spawnSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync, readdirSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { decodeStore, encodeStore } from "../src/ctx1.js";
import { loadReviews } from "../src/dataset.js";
import { testHashEncoder } from "../src/encoder.js";
import { exportEmbeddings } from "../src/exporter.js";

const FIXTURE_CSV =
  "category,rating,label,text\n" +
  'Books_5,5,CG,"A great, great book"\n' +
  "Books_5,2,og,disappointing sequel\n" +
  "Toys_5,4,CG,fun for kids\n";

function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "exporter-"));
}

function writeFixture(dir: string, content = FIXTURE_CSV): string {
  const path = join(dir, "reviews.csv");
  writeFileSync(path, content);
  return path;
}

function pythonLoaderAvailable(): boolean {
  const probe = spawnSync("python3", ["-c", "import reviewjudge"], {
    encoding: "utf-8",
  });
  return probe.status === 0;
}

describe("ctx1 format", () => {
  it("empty store is a 16-byte header plus 16-byte digest", () => {
    const bytes = encodeStore(384, new Map(), Buffer.alloc(16));
    expect(bytes.length).toBe(32);
    expect(bytes.toString("ascii", 0, 4)).toBe("CTX1");
    expect(bytes.readUInt32LE(4)).toBe(384);
    expect(Number(bytes.readBigUInt64LE(8))).toBe(0);
  });

  it("round-trips ids and float32 values", () => {
    const vectors = new Map<number, Float32Array>([
      [7, Float32Array.from([1.5, -2.25, 0.125])],
      [0, Float32Array.from([0, 0.5, 3])],
    ]);
    const digest = Buffer.from("0123456789abcdef", "ascii");
    const decoded = decodeStore(encodeStore(3, vectors, digest));
    expect(decoded.dim).toBe(3);
    expect(decoded.digest.equals(digest)).toBe(true);
    expect([...decoded.vectors.keys()].sort()).toEqual([0, 7]);
    expect([...decoded.vectors.get(7)!]).toEqual([1.5, -2.25, 0.125]);
  });

  it("rejects truncated buffers", () => {
    const bytes = encodeStore(2, new Map([[1, Float32Array.from([1, 2])]]), Buffer.alloc(16));
    expect(() => decodeStore(bytes.subarray(0, bytes.length - 3))).toThrow(/bytes/);
  });
});

describe("dataset loading", () => {
  it("assigns ids in row order and parses labels case-insensitively", () => {
    const dir = tempDir();
    const { reviews, skipped } = loadReviews(writeFixture(dir));
    expect(reviews.map((r) => r.id)).toEqual([0, 1, 2]);
    expect(reviews[0].text).toBe("A great, great book");
    expect(reviews[1].label).toBe("OG");
    expect(skipped).toBe(0);
  });

  it("skips malformed rows without consuming ids", () => {
    const dir = tempDir();
    const csv =
      "category,rating,label,text\n" +
      "A,1,CG,first\n" +
      "A,1,banana,bad label\n" +
      "A,1,OG,third\n";
    const { reviews, skipped } = loadReviews(writeFixture(dir, csv));
    expect(skipped).toBe(1);
    expect(reviews.map((r) => [r.id, r.text])).toEqual([
      [0, "first"],
      [1, "third"],
    ]);
  });

  it("names a missing column", () => {
    const dir = tempDir();
    const csv = "category,rating,text\nA,1,hello\n";
    expect(() => loadReviews(writeFixture(dir, csv))).toThrow(/label/);
  });

  it("accepts the text_ alias used by the published dataset", () => {
    const dir = tempDir();
    const csv = "category,rating,label,text_\nA,1,CG,aliased\n";
    const { reviews } = loadReviews(writeFixture(dir, csv));
    expect(reviews[0].text).toBe("aliased");
  });

  it("tolerates a UTF-8 byte order mark", () => {
    const dir = tempDir();
    const { reviews } = loadReviews(writeFixture(dir, "﻿" + FIXTURE_CSV));
    expect(reviews.length).toBe(3);
    expect(reviews[0].category).toBe("Books_5");
  });
});

describe("export", () => {
  it("writes a loadable store with one vector per review", async () => {
    const dir = tempDir();
    const out = join(dir, "ctx.bin");
    const manifest = await exportEmbeddings({
      datasetPath: writeFixture(dir),
      encoder: testHashEncoder(384),
      outPath: out,
    });
    expect(manifest.count).toBe(3);
    expect(manifest.dim).toBe(384);
    expect(manifest.model_identifier).toBe("test-hash-384");
    const store = decodeStore(readFileSync(out));
    expect(store.dim).toBe(384);
    expect([...store.vectors.keys()].sort()).toEqual([0, 1, 2]);
    const parsed = JSON.parse(readFileSync(`${out}.manifest.json`, "utf-8"));
    expect(parsed.corpus_digest).toMatch(/^[0-9a-f]{32}$/);
    expect(parsed.wall_time_s).toBeGreaterThanOrEqual(0);
  });

  it("aborts before writing when the encoder dimension is wrong", async () => {
    const dir = tempDir();
    const out = join(dir, "ctx.bin");
    await expect(
      exportEmbeddings({
        datasetPath: writeFixture(dir),
        encoder: testHashEncoder(128),
        outPath: out,
      })
    ).rejects.toThrow(/128/);
    expect(existsSync(out)).toBe(false);
    expect(readdirSync(dir).filter((f) => f.includes("tmp"))).toEqual([]);
  });

  it("re-export produces identical store bytes", async () => {
    const dir = tempDir();
    const dataset = writeFixture(dir);
    const outA = join(dir, "a.bin");
    const outB = join(dir, "b.bin");
    await exportEmbeddings({ datasetPath: dataset, encoder: testHashEncoder(), outPath: outA });
    await exportEmbeddings({ datasetPath: dataset, encoder: testHashEncoder(), outPath: outB });
    expect(readFileSync(outA).equals(readFileSync(outB))).toBe(true);
  });

  it("encodes cleaned tokens when a tokens file is supplied", async () => {
    const dir = tempDir();
    const dataset = writeFixture(dir);
    const tokensPath = join(dir, "tokens.jsonl");
    writeFileSync(
      tokensPath,
      [
        JSON.stringify({ id: 0, tokens: ["great", "book"] }),
        JSON.stringify({ id: 1, tokens: ["disappointing", "sequel"] }),
        JSON.stringify({ id: 2, tokens: ["fun", "kid"] }),
      ].join("\n") + "\n"
    );
    const out = join(dir, "ctx.bin");
    const encoder = testHashEncoder(384);
    await exportEmbeddings({
      datasetPath: dataset,
      encoder,
      outPath: out,
      cleanedTokensPath: tokensPath,
    });
    const store = decodeStore(readFileSync(out));
    const [expected] = await encoder.encode(["great book"]);
    expect([...store.vectors.get(0)!]).toEqual(expected.map((v) => Math.fround(v)));
  });

  it.skipIf(!pythonLoaderAvailable())(
    "store loads through the pipeline's own reader",
    async () => {
      const dir = tempDir();
      const out = join(dir, "ctx.bin");
      await exportEmbeddings({
        datasetPath: writeFixture(dir),
        encoder: testHashEncoder(),
        outPath: out,
      });
      const result = execFileSync(
        "python3",
        [
          "-c",
          "import sys; from reviewjudge.context import load_store; " +
            "s = load_store(sys.argv[1], expected_dim=384); " +
            "print(s.dim, len(s.vectors))",
          out,
        ],
        { encoding: "utf-8" }
      );
      expect(result.trim()).toBe("384 3");
    }
  );

  it.skipIf(!process.env.REVIEWJUDGE_DATASET)(
    "full dataset export yields 40432 vectors",
    async () => {
      const dir = tempDir();
      const out = join(dir, "full.bin");
      const manifest = await exportEmbeddings({
        datasetPath: process.env.REVIEWJUDGE_DATASET!,
        encoder: testHashEncoder(),
        outPath: out,
        batchSize: 1024,
      });
      expect(manifest.count).toBe(40432);
    },
    600_000
  );
});
