/**
 * Binary weight matrix files, wire-compatible with the toolchain:
 * little-endian header "SNWT", u16 version (1), u32 rows, u32 cols,
 * i8 bit width, i8 scale exponent, then row-major int32 values.
 */

const MAGIC = "SNWT";
const VERSION = 1;
const HEADER_SIZE = 16;

export function writeWeights(
  values: Int32Array,
  rows: number,
  cols: number,
  bits: number,
  scaleExp: number,
): Buffer {
  if (values.length !== rows * cols) {
    throw new Error(`expected ${rows * cols} values, got ${values.length}`);
  }
  const buf = Buffer.alloc(HEADER_SIZE + 4 * values.length);
  buf.write(MAGIC, 0, "ascii");
  buf.writeUInt16LE(VERSION, 4);
  buf.writeUInt32LE(rows, 6);
  buf.writeUInt32LE(cols, 10);
  buf.writeInt8(bits, 14);
  buf.writeInt8(scaleExp, 15);
  for (let i = 0; i < values.length; i++) {
    buf.writeInt32LE(values[i], HEADER_SIZE + 4 * i);
  }
  return buf;
}

export interface WeightFile {
  values: Int32Array;
  rows: number;
  cols: number;
  bits: number;
  scaleExp: number;
}

export function readWeights(buf: Buffer): WeightFile {
  if (buf.length < HEADER_SIZE || buf.toString("ascii", 0, 4) !== MAGIC) {
    throw new Error("not a weight file");
  }
  const version = buf.readUInt16LE(4);
  if (version !== VERSION) throw new Error(`unsupported version ${version}`);
  const rows = buf.readUInt32LE(6);
  const cols = buf.readUInt32LE(10);
  const bits = buf.readInt8(14);
  const scaleExp = buf.readInt8(15);
  if (buf.length !== HEADER_SIZE + 4 * rows * cols) {
    throw new Error("payload length mismatch");
  }
  const values = new Int32Array(rows * cols);
  for (let i = 0; i < values.length; i++) {
    values[i] = buf.readInt32LE(HEADER_SIZE + 4 * i);
  }
  return { values, rows, cols, bits, scaleExp };
}
