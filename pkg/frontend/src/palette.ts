/** Stable color/texture encodings for feature clusters: 12 hues x 4 textures. */

const HUES = [210, 30, 120, 280, 0, 60, 170, 330, 90, 250, 20, 150];
const TEXTURES = ["solid", "stripes", "dots", "cross"] as const;

export type Texture = (typeof TEXTURES)[number];

export interface Encoding {
  hue: number;
  color: string;
  texture: Texture;
  /** true when more than 48 clusters forced an encoding to be reused */
  reused: boolean;
}

export function encodingFor(clusterId: number): Encoding {
  const slot = (clusterId - 1) % 48;
  const hue = HUES[slot % 12];
  return {
    hue,
    color: `hsl(${hue}, 62%, 55%)`,
    texture: TEXTURES[Math.floor(slot / 12)],
    reused: clusterId - 1 >= 48,
  };
}

/** CSS background for a block: sequential gradient over its 20-bin histogram. */
export function histogramGradient(hist: number[], hue: number): string {
  const hi = Math.max(...hist, 1e-300);
  const stops = hist.map((v, i) => {
    const light = 92 - 52 * (v / hi);
    const from = ((i / hist.length) * 100).toFixed(1);
    const to = (((i + 1) / hist.length) * 100).toFixed(1);
    return `hsl(${hue}, 62%, ${light.toFixed(1)}%) ${from}% ${to}%`;
  });
  return `linear-gradient(to right, ${stops.join(", ")})`;
}
