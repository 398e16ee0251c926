/**
 * Text spike rasters: a "channels steps" header line, then one row of
 * '0'/'1' per timestep with channel 0 leftmost. Same layout the toolchain
 * reads and writes.
 */

export function writeRasterText(raster: Uint8Array[]): string {
  if (raster.length === 0) throw new Error("raster needs at least one step");
  const channels = raster[0].length;
  const lines = [`${channels} ${raster.length}`];
  for (const row of raster) {
    if (row.length !== channels) throw new Error("ragged raster");
    let s = "";
    for (let c = 0; c < channels; c++) s += row[c] ? "1" : "0";
    lines.push(s);
  }
  return lines.join("\n") + "\n";
}

export function readRasterText(text: string): Uint8Array[] {
  const lines = text.trim().split("\n");
  const [channels, steps] = lines[0].split(" ").map(Number);
  if (!Number.isInteger(channels) || !Number.isInteger(steps)) {
    throw new Error("bad raster header");
  }
  if (lines.length !== steps + 1) throw new Error("row count mismatch");
  const raster: Uint8Array[] = [];
  for (let t = 1; t <= steps; t++) {
    const line = lines[t];
    if (line.length !== channels) throw new Error(`row ${t} has wrong width`);
    const row = new Uint8Array(channels);
    for (let c = 0; c < channels; c++) {
      if (line[c] !== "0" && line[c] !== "1") throw new Error(`bad bit at row ${t}`);
      row[c] = line[c] === "1" ? 1 : 0;
    }
    raster.push(row);
  }
  return raster;
}
