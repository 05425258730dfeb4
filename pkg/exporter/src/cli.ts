#!/usr/bin/env node
/**
 * export_embeddings --in domains.txt --out cache.bin --model dev-hash-v1
 *                   [--dimension N] [--batch-size N] [--lexidga CMD]
 */

import { runExport } from "./export.js";

function usage(): never {
  console.error(
    "usage: export_embeddings --in <domains.txt> --out <cache.bin> " +
      "--model <id> [--dimension N] [--batch-size N] [--lexidga CMD]",
  );
  process.exit(2);
}

function parseArgs(argv: string[]): Map<string, string> {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    if (!flag.startsWith("--") || i + 1 >= argv.length) usage();
    args.set(flag.slice(2), argv[i + 1]);
  }
  return args;
}

const args = parseArgs(process.argv.slice(2));
const input = args.get("in");
const output = args.get("out");
const model = args.get("model");
if (!input || !output || !model) usage();

try {
  const summary = runExport({
    inputPath: input,
    outputPath: output,
    modelId: model,
    dimension: parseInt(args.get("dimension") ?? "1024", 10),
    batchSize: parseInt(args.get("batch-size") ?? "256", 10),
    tokenizer: args.has("lexidga") ? { command: args.get("lexidga")!.split(" ") } : {},
  });
  console.log(
    `wrote ${output}: ${summary.entries} entries, dimension ${summary.dimension}, ` +
      `model ${summary.modelId} (${summary.skipped} inputs skipped)`,
  );
  console.log(`manifest: ${summary.manifestPath} sha256=${summary.contentHash}`);
} catch (err) {
  console.error(`error: ${err instanceof Error ? err.message : err}`);
  process.exit(1);
}
