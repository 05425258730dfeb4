/**
 * LDGAEMB1 binary embedding-cache format (little-endian).
 *
 * Layout:
 * - magic "LDGAEMB1" (8 bytes)
 * - u32 dimension
 * - u64 entry count
 * - per entry: u32 key byte-length, UTF-8 key, dimension x f32 vector
 *
 * This is the byte layout the detector's cache loader consumes; vectors
 * written here must round-trip bit-identically.
 */

import { writeFileSync, readFileSync } from "node:fs";

export const CACHE_MAGIC = Buffer.from("LDGAEMB1", "ascii");

export interface CacheEntry {
  key: string;
  vector: Float32Array;
}

export function packCache(dimension: number, entries: CacheEntry[]): Buffer {
  let total = 8 + 4 + 8;
  const keyBufs: Buffer[] = [];
  for (const entry of entries) {
    if (entry.vector.length !== dimension) {
      throw new Error(
        `entry ${JSON.stringify(entry.key)} has length ${entry.vector.length}, expected ${dimension}`,
      );
    }
    const kb = Buffer.from(entry.key, "utf-8");
    keyBufs.push(kb);
    total += 4 + kb.length + 4 * dimension;
  }
  const buf = Buffer.alloc(total);
  let offset = 0;
  CACHE_MAGIC.copy(buf, offset); offset += 8;
  buf.writeUInt32LE(dimension, offset); offset += 4;
  buf.writeBigUInt64LE(BigInt(entries.length), offset); offset += 8;
  entries.forEach((entry, i) => {
    const kb = keyBufs[i];
    buf.writeUInt32LE(kb.length, offset); offset += 4;
    kb.copy(buf, offset); offset += kb.length;
    for (let j = 0; j < dimension; j++) {
      buf.writeFloatLE(entry.vector[j], offset); offset += 4;
    }
  });
  return buf;
}

export function writeCache(path: string, dimension: number, entries: CacheEntry[]): void {
  writeFileSync(path, packCache(dimension, entries));
}

/** Reader used by the exporter's own verification tests. */
export function readCache(path: string): { dimension: number; entries: CacheEntry[] } {
  const buf = readFileSync(path);
  if (buf.length < 8 || !buf.subarray(0, 8).equals(CACHE_MAGIC)) {
    throw new Error(`${path}: bad magic`);
  }
  if (buf.length < 20) throw new Error(`${path}: truncated header`);
  const dimension = buf.readUInt32LE(8);
  const count = Number(buf.readBigUInt64LE(12));
  const entries: CacheEntry[] = [];
  let offset = 20;
  for (let i = 0; i < count; i++) {
    if (offset + 4 > buf.length) throw new Error(`${path}: truncated entry header`);
    const keyLen = buf.readUInt32LE(offset); offset += 4;
    if (offset + keyLen + 4 * dimension > buf.length) {
      throw new Error(`${path}: truncated entry data`);
    }
    const key = buf.subarray(offset, offset + keyLen).toString("utf-8");
    offset += keyLen;
    const vector = new Float32Array(dimension);
    for (let j = 0; j < dimension; j++) {
      vector[j] = buf.readFloatLE(offset); offset += 4;
    }
    entries.push({ key, vector });
  }
  if (offset !== buf.length) throw new Error(`${path}: trailing bytes`);
  return { dimension, entries };
}
