// CTX1 binary store: magic "CTX1", u32 dim, u64 count, 16-byte corpus
// digest, then count records of (u64 review id, dim little-endian f32).
// Records are written in ascending id order so identical inputs produce
// identical bytes.

import { endianness } from "node:os";

export const CTX_MAGIC = "CTX1";
export const HEADER_SIZE = 16;
export const DIGEST_SIZE = 16;

export interface StoreContents {
  dim: number;
  digest: Buffer;
  vectors: Map<number, Float32Array>;
}

export function encodeStore(
  dim: number,
  vectors: Map<number, Float32Array>,
  digest: Buffer
): Buffer {
  if (digest.length !== DIGEST_SIZE) {
    throw new Error(`corpus digest must be ${DIGEST_SIZE} bytes`);
  }
  const ids = [...vectors.keys()].sort((a, b) => a - b);
  const recordSize = 8 + 4 * dim;
  const out = Buffer.alloc(HEADER_SIZE + DIGEST_SIZE + ids.length * recordSize);
  out.write(CTX_MAGIC, 0, "ascii");
  out.writeUInt32LE(dim, 4);
  out.writeBigUInt64LE(BigInt(ids.length), 8);
  digest.copy(out, HEADER_SIZE);

  const littleEndianHost = endianness() === "LE";
  let offset = HEADER_SIZE + DIGEST_SIZE;
  for (const id of ids) {
    const vec = vectors.get(id)!;
    if (vec.length !== dim) {
      throw new Error(`vector for review ${id} has length ${vec.length}, expected ${dim}`);
    }
    out.writeBigUInt64LE(BigInt(id), offset);
    offset += 8;
    if (littleEndianHost) {
      Buffer.from(vec.buffer, vec.byteOffset, vec.byteLength).copy(out, offset);
      offset += vec.byteLength;
    } else {
      for (const value of vec) {
        out.writeFloatLE(value, offset);
        offset += 4;
      }
    }
  }
  return out;
}

export function decodeStore(buf: Buffer): StoreContents {
  if (buf.length < HEADER_SIZE + DIGEST_SIZE) {
    throw new Error("truncated header");
  }
  if (buf.toString("ascii", 0, 4) !== CTX_MAGIC) {
    throw new Error(`bad magic ${buf.toString("ascii", 0, 4)}`);
  }
  const dim = buf.readUInt32LE(4);
  const count = Number(buf.readBigUInt64LE(8));
  const digest = Buffer.from(buf.subarray(HEADER_SIZE, HEADER_SIZE + DIGEST_SIZE));
  const recordSize = 8 + 4 * dim;
  const expected = HEADER_SIZE + DIGEST_SIZE + count * recordSize;
  if (buf.length !== expected) {
    throw new Error(`store is ${buf.length} bytes, expected ${expected}`);
  }
  const vectors = new Map<number, Float32Array>();
  let offset = HEADER_SIZE + DIGEST_SIZE;
  for (let i = 0; i < count; i++) {
    const id = Number(buf.readBigUInt64LE(offset));
    offset += 8;
    const vec = new Float32Array(dim);
    for (let j = 0; j < dim; j++) {
      vec[j] = buf.readFloatLE(offset);
      offset += 4;
    }
    vectors.set(id, vec);
  }
  return { dim, digest, vectors };
}
