#!/usr/bin/env node
// reviewjudge-export --dataset reviews.csv --model <encoder> --out ctx.bin
//   [--batch-size N] [--use-cleaned tokens.jsonl]
//
// --use-cleaned takes the JSONL written by `reviewjudge preprocess
// --tokens-out`, so the exact pipeline cleaning is reused rather than
// reimplemented here.

import { parseArgs } from "node:util";

import { resolveEncoder } from "./encoder.js";
import { exportEmbeddings } from "./exporter.js";

async function main(): Promise<number> {
  const { values } = parseArgs({
    options: {
      dataset: { type: "string" },
      model: { type: "string" },
      out: { type: "string" },
      "batch-size": { type: "string", default: "64" },
      "use-cleaned": { type: "string" },
    },
  });
  if (!values.dataset || !values.model || !values.out) {
    console.error(
      "usage: reviewjudge-export --dataset <csv> --model <encoder-id> --out <store> " +
        "[--batch-size N] [--use-cleaned tokens.jsonl]\n" +
        "encoder ids: a pretrained 384-d sentence encoder (via @xenova/transformers), " +
        "or test-hash-384 for an offline smoke run"
    );
    return 2;
  }
  const encoder = await resolveEncoder(values.model);
  const manifest = await exportEmbeddings({
    datasetPath: values.dataset,
    encoder,
    outPath: values.out,
    batchSize: Number(values["batch-size"]),
    cleanedTokensPath: values["use-cleaned"],
    log: (line) => console.error(line),
  });
  console.log(JSON.stringify(manifest, null, 2));
  return 0;
}

main()
  .then((code) => process.exit(code))
  .catch((err) => {
    console.error(String(err?.message ?? err));
    process.exit(1);
  });
