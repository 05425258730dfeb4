/**
 * The export pipeline: read a domain list, tokenize through the
 * detector CLI, embed each unique key with the selected model, write
 * the LDGAEMB1 cache and a manifest beside it.
 */

import { createHash } from "node:crypto";
import { readFileSync, writeFileSync } from "node:fs";

import { CacheEntry, packCache } from "./cache.js";
import { EmbeddingModel, resolveModel } from "./models.js";
import { tokenizeDomains, tokensToKey, TokenizerOptions } from "./segment.js";

export interface ExportJob {
  inputPath: string;
  outputPath: string;
  modelId: string;
  dimension: number;
  batchSize: number;
  tokenizer?: TokenizerOptions;
}

export interface ExportSummary {
  domains: number;
  skipped: number;
  entries: number;
  dimension: number;
  modelId: string;
  contentHash: string;
  manifestPath: string;
}

export function readDomainList(path: string): string[] {
  return readFileSync(path, "utf-8")
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0 && !line.startsWith("#"));
}

export function runExport(job: ExportJob): ExportSummary {
  const domains = readDomainList(job.inputPath);
  if (domains.length === 0) {
    throw new Error(`${job.inputPath}: no domains to export`);
  }
  const model: EmbeddingModel = resolveModel(job.modelId, job.dimension);

  const tokenized = tokenizeDomains(domains, job.tokenizer);
  const keys: string[] = [];
  const seen = new Set<string>();
  for (const tokens of tokenized.tokens) {
    const key = tokensToKey(tokens);
    if (!seen.has(key)) {
      seen.add(key);
      keys.push(key);
    }
  }

  const entries: CacheEntry[] = [];
  for (let lo = 0; lo < keys.length; lo += job.batchSize) {
    const batch = keys.slice(lo, lo + job.batchSize);
    const vectors = model.embedBatch(batch);
    batch.forEach((key, i) => entries.push({ key, vector: vectors[i] }));
  }

  const blob = packCache(model.dimension, entries);
  writeFileSync(job.outputPath, blob);
  const contentHash = createHash("sha256").update(blob).digest("hex");

  const manifestPath = job.outputPath + ".manifest";
  const manifest = [
    `cache = ${job.outputPath}`,
    `count = ${entries.length}`,
    `dimension = ${model.dimension}`,
    `model = ${model.id}`,
    `sha256 = ${contentHash}`,
    `input_domains = ${domains.length}`,
    `skipped_inputs = ${tokenized.skipped.length}`,
  ].join("\n") + "\n";
  writeFileSync(manifestPath, manifest);

  return {
    domains: domains.length,
    skipped: tokenized.skipped.length,
    entries: entries.length,
    dimension: model.dimension,
    modelId: model.id,
    contentHash,
    manifestPath,
  };
}
