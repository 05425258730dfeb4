/**
 * Tokenization via the detector's own `segment` subcommand.
 *
 * The exporter never reimplements the segmentation dynamic program:
 * domains are piped through `lexidga segment --stdin` so cache keys are
 * produced by the exact code that will later look them up. Lines the
 * detector rejects (bad hostnames, suffix-only domains) come back as
 * "!\t<reason>" records and are reported as skipped.
 */

import { spawnSync } from "node:child_process";

export interface TokenizeResult {
  /** tokens per accepted input, aligned with `accepted` */
  tokens: string[][];
  /** the input domains that tokenized successfully */
  accepted: string[];
  /** [domain, reason] pairs the detector rejected */
  skipped: Array<[string, string]>;
}

export interface TokenizerOptions {
  /** command to invoke, default ["lexidga"]; tests may use ["python3", "-m", "lexidga.cli"] */
  command?: string[];
}

export function tokenizeDomains(domains: string[], options: TokenizerOptions = {}): TokenizeResult {
  const command = options.command ?? ["lexidga"];
  if (domains.length === 0) return { tokens: [], accepted: [], skipped: [] };
  const proc = spawnSync(command[0], [...command.slice(1), "segment", "--stdin"], {
    input: domains.join("\n") + "\n",
    encoding: "utf-8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (proc.error) throw proc.error;
  if (proc.status !== 0) {
    throw new Error(`segment subcommand failed (exit ${proc.status}): ${proc.stderr}`);
  }
  const lines = proc.stdout.replace(/\n$/, "").split("\n");
  if (lines.length !== domains.length) {
    throw new Error(
      `segment output misaligned: ${domains.length} domains in, ${lines.length} lines out`,
    );
  }
  const result: TokenizeResult = { tokens: [], accepted: [], skipped: [] };
  lines.forEach((line, i) => {
    const fields = line.split("\t");
    if (fields[0] === "!") {
      result.skipped.push([domains[i], fields.slice(1).join("\t")]);
    } else {
      result.tokens.push(fields);
      result.accepted.push(domains[i]);
    }
  });
  return result;
}

/** Cache keys are the tokens joined with single spaces. */
export function tokensToKey(tokens: string[]): string {
  return tokens.join(" ");
}
