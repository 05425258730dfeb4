import { spawnSync } from "node:child_process";

/** Invoke the detector CLI the same way CI boxes without PATH scripts do. */
export const LEXIDGA = ["python3", "-m", "lexidga.cli"];

export function runLexidga(args: string[], input?: string): string {
  const proc = spawnSync(LEXIDGA[0], [...LEXIDGA.slice(1), ...args], {
    input,
    encoding: "utf-8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (proc.status !== 0) {
    throw new Error(`lexidga ${args[0]} failed: ${proc.stderr}`);
  }
  return proc.stdout;
}

export function runPython(code: string): string {
  const proc = spawnSync("python3", ["-c", code], {
    encoding: "utf-8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (proc.status !== 0) {
    throw new Error(`python failed: ${proc.stderr}`);
  }
  return proc.stdout;
}

/** A mixed-family corpus generated by the detector's own generators. */
export function generateCorpus(perFamily: number, seed = 1000): string[] {
  const domains: string[] = [];
  for (const family of ["matsnu", "rovnix", "pizd", "suppobox"]) {
    const out = runLexidga([
      "generate", "--family", family, "--seed", String(seed), "--count", String(perFamily),
    ]);
    domains.push(...out.trim().split("\n"));
  }
  return domains;
}
