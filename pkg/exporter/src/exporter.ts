import { createHash } from "node:crypto";
import { readFileSync, renameSync, rmSync, writeFileSync } from "node:fs";

import { encodeStore } from "./ctx1.js";
import { loadCleanedTokens, loadReviews } from "./dataset.js";
import { SentenceEncoder } from "./encoder.js";

export const REQUIRED_DIM = 384;

export interface ExportOptions {
  datasetPath: string;
  encoder: SentenceEncoder;
  outPath: string;
  batchSize?: number;
  /** JSONL of {id, tokens} from the pipeline's preprocess step; when set,
   * the cleaned tokens are encoded instead of the raw text. */
  cleanedTokensPath?: string;
  log?: (line: string) => void;
}

export interface ExportManifest {
  dataset_path: string;
  model_identifier: string;
  dim: number;
  count: number;
  corpus_digest: string;
  wall_time_s: number;
  used_cleaned: boolean;
}

export async function exportEmbeddings(options: ExportOptions): Promise<ExportManifest> {
  const { datasetPath, encoder, outPath } = options;
  const batchSize = options.batchSize ?? 64;
  const log = options.log ?? (() => {});
  const started = Date.now();

  if (encoder.dim !== REQUIRED_DIM) {
    throw new Error(
      `encoder '${encoder.id}' produces ${encoder.dim}-d vectors; the pipeline requires ${REQUIRED_DIM}`
    );
  }

  const { reviews, skipped } = loadReviews(datasetPath);
  if (skipped > 0) {
    log(`skipped ${skipped} malformed rows`);
  }
  let texts: string[];
  if (options.cleanedTokensPath) {
    const tokens = loadCleanedTokens(options.cleanedTokensPath);
    texts = reviews.map((r) => {
      const cleaned = tokens.get(r.id);
      if (cleaned === undefined) {
        throw new Error(`cleaned tokens file has no entry for review ${r.id}`);
      }
      return cleaned.join(" ");
    });
  } else {
    texts = reviews.map((r) => r.text);
  }

  const vectors = new Map<number, Float32Array>();
  for (let start = 0; start < texts.length; start += batchSize) {
    const batch = texts.slice(start, start + batchSize);
    const encoded = await encoder.encode(batch);
    encoded.forEach((vec, i) => {
      vectors.set(reviews[start + i].id, Float32Array.from(vec));
    });
    log(`encoded ${Math.min(start + batchSize, texts.length)}/${texts.length}`);
  }

  const digest = createHash("md5").update(readFileSync(datasetPath)).digest();
  const bytes = encodeStore(REQUIRED_DIM, vectors, digest);

  // temp-file-and-rename so a failed run never leaves a torn store behind
  const tempPath = `${outPath}.tmp-${process.pid}`;
  try {
    writeFileSync(tempPath, bytes);
    renameSync(tempPath, outPath);
  } catch (err) {
    rmSync(tempPath, { force: true });
    throw err;
  }

  const manifest: ExportManifest = {
    dataset_path: datasetPath,
    model_identifier: encoder.id,
    dim: REQUIRED_DIM,
    count: vectors.size,
    corpus_digest: digest.toString("hex"),
    wall_time_s: (Date.now() - started) / 1000,
    used_cleaned: options.cleanedTokensPath !== undefined,
  };
  writeFileSync(`${outPath}.manifest.json`, JSON.stringify(manifest, null, 2) + "\n");
  return manifest;
}
