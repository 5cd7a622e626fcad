import { PNG } from "pngjs";
import { Rgb, WHITE } from "./color.js";

/** A fixed-size RGBA image with integer pixel drawing primitives. */
export class Raster {
  readonly width: number;
  readonly height: number;
  readonly data: Buffer;

  constructor(width: number, height: number, fill: Rgb = WHITE) {
    if (!Number.isInteger(width) || !Number.isInteger(height) ||
        width <= 0 || height <= 0) {
      throw new Error(`invalid raster size ${width}x${height}`);
    }
    this.width = width;
    this.height = height;
    this.data = Buffer.alloc(width * height * 4);
    for (let k = 0; k < width * height; k++) {
      this.data[4 * k] = fill[0];
      this.data[4 * k + 1] = fill[1];
      this.data[4 * k + 2] = fill[2];
      this.data[4 * k + 3] = 255;
    }
  }

  set(x: number, y: number, c: Rgb): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const k = 4 * (y * this.width + x);
    this.data[k] = c[0];
    this.data[k + 1] = c[1];
    this.data[k + 2] = c[2];
    this.data[k + 3] = 255;
  }

  get(x: number, y: number): Rgb {
    const k = 4 * (y * this.width + x);
    return [this.data[k], this.data[k + 1], this.data[k + 2]];
  }

  fillRect(x0: number, y0: number, w: number, h: number, c: Rgb): void {
    for (let y = y0; y < y0 + h; y++) {
      for (let x = x0; x < x0 + w; x++) {
        this.set(x, y, c);
      }
    }
  }

  /** Rectangle border, one pixel wide. */
  frame(x0: number, y0: number, w: number, h: number, c: Rgb): void {
    for (let x = x0; x < x0 + w; x++) {
      this.set(x, y0, c);
      this.set(x, y0 + h - 1, c);
    }
    for (let y = y0; y < y0 + h; y++) {
      this.set(x0, y, c);
      this.set(x0 + w - 1, y, c);
    }
  }

  /** Bresenham line between integer endpoints. */
  line(x0: number, y0: number, x1: number, y1: number, c: Rgb): void {
    let x = x0;
    let y = y0;
    const dx = Math.abs(x1 - x0);
    const dy = -Math.abs(y1 - y0);
    const sx = x0 < x1 ? 1 : -1;
    const sy = y0 < y1 ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(x, y, c);
      if (x === x1 && y === y1) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
    }
  }

  /** Filled square marker centered at (x, y). */
  marker(x: number, y: number, half: number, c: Rgb): void {
    this.fillRect(x - half, y - half, 2 * half + 1, 2 * half + 1, c);
  }

  toPng(): Buffer {
    const png = new PNG({ width: this.width, height: this.height });
    this.data.copy(png.data);
    return PNG.sync.write(png);
  }
}

/** Decode a PNG buffer back into a raster (used by tests). */
export function fromPng(buf: Buffer): Raster {
  const png = PNG.sync.read(buf);
  const r = new Raster(png.width, png.height);
  png.data.copy(r.data);
  return r;
}
