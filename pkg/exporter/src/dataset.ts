// Review CSV loading, mirroring the pipeline's id assignment: columns are
// matched by name (text_ accepted as an alias for text), labels parse
// case-insensitively, and ids run 0..n-1 over the kept rows.

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export interface ReviewRow {
  id: number;
  category: string;
  rating: number;
  label: "CG" | "OG";
  text: string;
}

export interface LoadResult {
  reviews: ReviewRow[];
  skipped: number;
}

const REQUIRED = ["category", "rating", "label", "text"] as const;

export function loadReviews(path: string, skipInvalid = true): LoadResult {
  // strip a UTF-8 BOM so it cannot corrupt the first header name
  const raw = readFileSync(path, "utf-8").replace(/^﻿/, "");
  const parsed = Papa.parse<Record<string, string>>(raw, {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`${path}: CSV parse error at row ${first.row}: ${first.message}`);
  }
  const fields = parsed.meta.fields ?? [];
  const byName = new Map<string, string>();
  for (const field of fields) {
    byName.set(field === "text_" ? "text" : field, field);
  }
  for (const column of REQUIRED) {
    if (!byName.has(column)) {
      throw new Error(`${path}: missing required column '${column}'`);
    }
  }

  const reviews: ReviewRow[] = [];
  let skipped = 0;
  parsed.data.forEach((row, index) => {
    const text = (row[byName.get("text")!] ?? "").trim();
    const labelRaw = (row[byName.get("label")!] ?? "").trim().toUpperCase();
    const problem =
      text === ""
        ? "empty review text"
        : labelRaw !== "CG" && labelRaw !== "OG"
          ? `unknown label '${labelRaw}'`
          : null;
    if (problem !== null) {
      if (!skipInvalid) {
        throw new Error(`${path}: row ${index + 2}: ${problem}`);
      }
      skipped += 1;
      return;
    }
    reviews.push({
      id: reviews.length,
      category: (row[byName.get("category")!] ?? "").trim(),
      rating: Number(row[byName.get("rating")!] ?? "NaN"),
      label: labelRaw as "CG" | "OG",
      text,
    });
  });
  return { reviews, skipped };
}

export function loadCleanedTokens(path: string): Map<number, string[]> {
  const out = new Map<number, string[]>();
  for (const line of readFileSync(path, "utf-8").split("\n")) {
    if (!line.trim()) continue;
    const record = JSON.parse(line) as { id: number; tokens: string[] };
    out.set(record.id, record.tokens);
  }
  return out;
}
