export type Rgb = [number, number, number];

/** Anchor colors of the viridis map, sampled uniformly on [0, 1]. */
const ANCHORS: Rgb[] = [
  [68, 1, 84],
  [72, 40, 120],
  [62, 74, 137],
  [49, 104, 142],
  [38, 130, 142],
  [31, 158, 137],
  [53, 183, 121],
  [109, 205, 89],
  [180, 222, 44],
  [253, 231, 37],
];

/** Map t in [0, 1] to a color by linear interpolation between anchors. */
export function colormap(t: number): Rgb {
  const s = Math.min(1, Math.max(0, t)) * (ANCHORS.length - 1);
  const k = Math.min(ANCHORS.length - 2, Math.floor(s));
  const f = s - k;
  const a = ANCHORS[k];
  const b = ANCHORS[k + 1];
  return [
    Math.round(a[0] + f * (b[0] - a[0])),
    Math.round(a[1] + f * (b[1] - a[1])),
    Math.round(a[2] + f * (b[2] - a[2])),
  ];
}

export const BLACK: Rgb = [0, 0, 0];
export const WHITE: Rgb = [255, 255, 255];
export const GRAY: Rgb = [160, 160, 160];

/** Distinct line colors for multi-series panels. */
export const SERIES: Rgb[] = [
  [31, 119, 180],
  [255, 127, 14],
  [44, 160, 44],
  [214, 39, 40],
  [148, 103, 189],
  [140, 86, 75],
];
