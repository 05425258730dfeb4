import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { createHash } from "node:crypto";
import { spawnSync } from "node:child_process";
import { describe, expect, it } from "vitest";

import { runExport } from "../src/export.js";
import { readCache } from "../src/cache.js";
import { LEXIDGA, generateCorpus, runPython } from "./helpers.js";

function exportCorpus(domains: string[], dimension = 64) {
  const dir = mkdtempSync(join(tmpdir(), "ldga-export-"));
  const inputPath = join(dir, "domains.txt");
  writeFileSync(inputPath, domains.join("\n") + "\n");
  const outputPath = join(dir, "cache.bin");
  const summary = runExport({
    inputPath,
    outputPath,
    modelId: "dev-hash-v1",
    dimension,
    batchSize: 32,
    tokenizer: { command: LEXIDGA },
  });
  return { dir, inputPath, outputPath, summary };
}

describe("export pipeline", () => {
  it("exports 100 domains the detector loads with zero cache misses and bit-identical vectors", () => {
    const domains = generateCorpus(25, 4242);
    expect(domains.length).toBe(100);
    const { outputPath, summary } = exportCorpus(domains);
    expect(summary.skipped).toBe(0);
    expect(summary.entries).toBeGreaterThan(90); // distinct keys (dedup allowed)

    // sha256 of each vector's raw little-endian bytes, computed on our side
    const ours = new Map<string, string>();
    for (const entry of readCache(outputPath).entries) {
      ours.set(entry.key, createHash("sha256").update(Buffer.from(entry.vector.buffer)).digest("hex"));
    }

    // the detector loads the cache, re-tokenizes every exported domain,
    // resolves each through the cache provider (a miss would raise), and
    // prints the same digest per key
    const code = `
import hashlib, sys
from lexidga.embed import load_cache, CacheProvider
from lexidga.preprocess import normalize
from lexidga.segment import segment

cache = load_cache(${JSON.stringify(outputPath)}, expect_dimension=64)
provider = CacheProvider(cache)
domains = ${JSON.stringify(domains)}
for raw in domains:
    tokens = segment(normalize(raw).core).tokens
    vec = provider.embed_tokens(tokens)   # CacheMiss would raise here
    key = " ".join(tokens)
    print(key + "\\t" + hashlib.sha256(vec.tobytes()).hexdigest())
`;
    const lines = runPython(code).trim().split("\n");
    expect(lines.length).toBe(100);
    let mismatches = 0;
    for (const line of lines) {
      const [key, digest] = line.split("\t");
      if (ours.get(key) !== digest) mismatches += 1;
    }
    expect(mismatches).toBe(0);
  });

  it("deduplicates repeated domains to unique keys", () => {
    const { summary } = exportCorpus(
      ["middleapple.net", "middleapple.net", "middleapple.com", "catsdogs.com"]);
    // same core across TLDs collapses to one tokenized key
    expect(summary.entries).toBe(2);
    expect(summary.domains).toBe(4);
  });

  it("writes a manifest with count, dimension, model id, and content hash", () => {
    const { outputPath, summary } = exportCorpus(["middleapple.net", "catsdogs.com"]);
    const manifest = readFileSync(summary.manifestPath, "utf-8");
    expect(manifest).toContain("count = 2");
    expect(manifest).toContain("dimension = 64");
    expect(manifest).toContain("model = dev-hash-v1");
    const blob = readFileSync(outputPath);
    const digest = createHash("sha256").update(blob).digest("hex");
    expect(manifest).toContain(`sha256 = ${digest}`);
    expect(summary.contentHash).toBe(digest);
  });

  it("skips rejected lines and reports them", () => {
    const { summary } = exportCorpus(["middleapple.net", "co.uk", "catsdogs.com"]);
    expect(summary.skipped).toBe(1);
    expect(summary.entries).toBe(2);
  });

  it("a header dimension mismatch makes the detector loader raise DimensionMismatch", () => {
    const { outputPath } = exportCorpus(["middleapple.net"]);
    const corrupted = Buffer.from(readFileSync(outputPath));
    corrupted.writeUInt32LE(32, 8); // claim dimension 32 in the header
    const corruptedPath = outputPath + ".bad";
    writeFileSync(corruptedPath, corrupted);
    const code = `
from lexidga.embed import load_cache, DimensionMismatch, TruncatedFile
try:
    load_cache(${JSON.stringify(corruptedPath)}, expect_dimension=64)
    print("LOADED")
except DimensionMismatch:
    print("DIMENSION_MISMATCH")
except TruncatedFile:
    print("TRUNCATED")
`;
    expect(runPython(code).trim()).toBe("DIMENSION_MISMATCH");
  });

  it("is deterministic: same input, same bytes", () => {
    const domains = ["middleapple.net", "catsdogs.com", "firesidestaircase.com"];
    const a = exportCorpus(domains);
    const b = exportCorpus(domains);
    expect(readFileSync(a.outputPath)).toEqual(readFileSync(b.outputPath));
  });

  it("rejects an empty input list", () => {
    const dir = mkdtempSync(join(tmpdir(), "ldga-export-"));
    const inputPath = join(dir, "empty.txt");
    writeFileSync(inputPath, "# nothing here\n");
    expect(() =>
      runExport({
        inputPath,
        outputPath: join(dir, "cache.bin"),
        modelId: "dev-hash-v1",
        dimension: 8,
        batchSize: 4,
        tokenizer: { command: LEXIDGA },
      }),
    ).toThrow(/no domains/);
  });

  it("rejects unknown model ids", () => {
    const dir = mkdtempSync(join(tmpdir(), "ldga-export-"));
    const inputPath = join(dir, "domains.txt");
    writeFileSync(inputPath, "middleapple.net\n");
    expect(() =>
      runExport({
        inputPath,
        outputPath: join(dir, "cache.bin"),
        modelId: "elmo-original",
        dimension: 8,
        batchSize: 4,
        tokenizer: { command: LEXIDGA },
      }),
    ).toThrow(/unknown model/);
  });

  it("the built CLI entry point works end to end", () => {
    const build = spawnSync("npx", ["tsc"], { cwd: join(__dirname, ".."), encoding: "utf-8" });
    expect(build.status, build.stderr + build.stdout).toBe(0);
    const dir = mkdtempSync(join(tmpdir(), "ldga-cli-"));
    const inputPath = join(dir, "domains.txt");
    writeFileSync(inputPath, "middleapple.net\ncatsdogs.com\n");
    const outputPath = join(dir, "cache.bin");
    const proc = spawnSync(
      "node",
      [join(__dirname, "..", "dist", "cli.js"),
       "--in", inputPath, "--out", outputPath, "--model", "dev-hash-v1",
       "--dimension", "16", "--lexidga", LEXIDGA.join(" ")],
      { encoding: "utf-8" },
    );
    expect(proc.status, proc.stderr).toBe(0);
    expect(proc.stdout).toContain("2 entries");
    expect(readCache(outputPath).dimension).toBe(16);
  });
});
