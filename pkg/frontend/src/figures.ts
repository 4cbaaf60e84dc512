import { join } from "node:path";

import { readDropped, readInp, readRates } from "./csv.js";
import { ecdf, histogram, pmf, stepPoints } from "./stats.js";
import { Panel, Series, renderSvg } from "./svg.js";

export const FIGURE_KINDS = ["rates", "dropped", "inp-pdf", "inp-cdf"] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface SeriesKey {
  scheme: string;
  model: string;
}

export interface FigureSpec {
  kind: FigureKind;
  /** Optional explicit series selection; defaults to everything present. */
  series?: SeriesKey[];
}

/** Per-antenna noise floor drawn on the interference figures, dBW. */
export const NOISE_FLOOR_DBW = -114;

const MODEL_COLOR: Record<string, string> = {
  oim: "#1f77b4",
  bim: "#d62728",
};
const SCHEME_DASH: Record<string, string | undefined> = {
  "max-sinr": undefined,
  wcs: "7 4",
};

export class MissingSeriesError extends Error {
  constructor(name: string) {
    super(`missing series ${name}`);
    this.name = "MissingSeriesError";
  }
}

function keyName(k: SeriesKey): string {
  return `${k.scheme}/${k.model}`;
}

function seriesStyle(k: SeriesKey): { color: string; dash?: string } {
  return {
    color: MODEL_COLOR[k.model] ?? "#333333",
    dash: SCHEME_DASH[k.scheme],
  };
}

function sortKeys(keys: SeriesKey[]): SeriesKey[] {
  return [...keys].sort((a, b) =>
    a.scheme === b.scheme ? a.model.localeCompare(b.model) : a.scheme.localeCompare(b.scheme));
}

/**
 * Per-series samples of one metric. Rates come from rates.csv and include
 * dropped UEs at rate 0 (the zero mass is part of the distribution);
 * interference powers come from inp_power.csv and cover served UEs only.
 */
function loadSamples(dir: string, metric: "rate" | "inp"): Map<string, number[]> {
  const groups = new Map<string, number[]>();
  const add = (scheme: string, model: string, value: number) => {
    const name = keyName({ scheme, model });
    if (!groups.has(name)) groups.set(name, []);
    groups.get(name)!.push(value);
  };
  if (metric === "rate") {
    for (const r of readRates(join(dir, "rates.csv"))) add(r.scheme, r.model, r.rate_bps_hz);
  } else {
    for (const r of readInp(join(dir, "inp_power.csv"))) add(r.scheme, r.model, r.inp_dbw);
  }
  return groups;
}

function foundKeys(groups: Map<string, number[]>): SeriesKey[] {
  return sortKeys([...groups.keys()].map((name) => {
    const [scheme, model] = name.split("/");
    return { scheme, model };
  }));
}

/** The (scheme, model) pairs present in the campaign's sample CSVs. */
export function discoverSeries(dir: string, metric: "rate" | "inp"): SeriesKey[] {
  return foundKeys(loadSamples(dir, metric));
}

function resolveSeries(found: SeriesKey[], requested: SeriesKey[] | undefined,
                       what: string): SeriesKey[] {
  if (requested !== undefined) {
    if (requested.length === 0) throw new Error(`empty series list for ${what}`);
    const have = new Set(found.map(keyName));
    for (const k of requested) {
      if (!have.has(keyName(k))) throw new MissingSeriesError(keyName(k));
    }
    return requested;
  }
  if (found.length === 0) throw new Error(`no ${what} series found`);
  return found;
}

function cdfPanel(dir: string, metric: "rate" | "inp", spec: FigureSpec,
                  xLabel: string, vline: boolean): Panel {
  const groups = loadSamples(dir, metric);
  const keys = resolveSeries(foundKeys(groups), spec.series, metric);
  const series: Series[] = keys.map((k) => {
    const { values, cumProb } = ecdf(groups.get(keyName(k))!);
    return {
      label: `${k.scheme} ${k.model.toUpperCase()}`,
      ...seriesStyle(k),
      points: stepPoints(values, cumProb),
    };
  });
  return {
    xLabel,
    yLabel: "Cumulative probability",
    series,
    yDomain: [0, 1.04],
    vlines: vline ? [{ x: NOISE_FLOOR_DBW, label: `${NOISE_FLOOR_DBW} dBW` }] : undefined,
  };
}

function inpPdfPanel(dir: string, spec: FigureSpec): Panel {
  const groups = loadSamples(dir, "inp");
  const keys = resolveSeries(foundKeys(groups), spec.series, "interference");
  const all = keys.flatMap((k) => groups.get(keyName(k))!);
  const lo = Math.min(...all, NOISE_FLOOR_DBW);
  const hi = Math.max(...all);
  const series: Series[] = keys.map((k) => {
    const h = histogram(groups.get(keyName(k))!, 24, lo, hi);
    return {
      label: `${k.scheme} ${k.model.toUpperCase()}`,
      ...seriesStyle(k),
      points: h.centers.map((c, i) => [c, h.densities[i]] as [number, number]),
    };
  });
  return {
    xLabel: "Interference plus noise power (dBW)",
    yLabel: "Probability density",
    series,
    vlines: [{ x: NOISE_FLOOR_DBW, label: `${NOISE_FLOOR_DBW} dBW` }],
  };
}

function droppedPanels(dir: string, spec: FigureSpec): Panel[] {
  const rows = readDropped(join(dir, "dropped.csv"));
  const groups = new Map<string, number[]>();
  for (const r of rows) {
    if (!groups.has(r.scheme)) groups.set(r.scheme, []);
    groups.get(r.scheme)!.push(r.count);
  }
  let schemes = [...groups.keys()].sort();
  if (spec.series !== undefined) {
    if (spec.series.length === 0) throw new Error("empty series list for dropped");
    const wanted = [...new Set(spec.series.map((k) => k.scheme))];
    for (const s of wanted) {
      if (!groups.has(s)) throw new MissingSeriesError(s);
    }
    schemes = wanted;
  }
  if (schemes.length === 0) throw new Error("no dropped series found");
  const colors = ["#2ca02c", "#9467bd"];
  const pdfSeries: Series[] = schemes.map((s, i) => ({
    label: s,
    color: colors[i % colors.length],
    kind: "bars",
    barWidth: 0.8,
    points: pmf(groups.get(s)!).map((p) => [p.value, p.prob] as [number, number]),
  }));
  const cdfSeries: Series[] = schemes.map((s, i) => {
    const m = pmf(groups.get(s)!);
    let cum = 0;
    const probs = m.map((p) => (cum += p.prob));
    return {
      label: s,
      color: colors[i % colors.length],
      points: stepPoints(m.map((p) => p.value), probs),
    };
  });
  return [
    { title: "PDF", xLabel: "Number of dropped UEs", yLabel: "Probability", series: pdfSeries },
    { title: "CDF", xLabel: "Number of dropped UEs", yLabel: "Cumulative probability",
      series: cdfSeries, yDomain: [0, 1.04] },
  ];
}

/**
 * Render one figure from the campaign CSVs in `dir` and return the SVG
 * markup. Accepts a bare kind or a full spec with a series selection; the
 * input files are only read, never written.
 */
export function buildFigure(dir: string, figure: FigureKind | FigureSpec): string {
  const spec: FigureSpec = typeof figure === "string" ? { kind: figure } : figure;
  switch (spec.kind) {
    case "rates":
      return renderSvg([cdfPanel(dir, "rate", spec, "Spectral efficiency (bits/s/Hz)", false)]);
    case "inp-cdf":
      return renderSvg([cdfPanel(dir, "inp", spec, "Interference plus noise power (dBW)", true)]);
    case "inp-pdf":
      return renderSvg([inpPdfPanel(dir, spec)]);
    case "dropped":
      return renderSvg(droppedPanels(dir, spec));
    default:
      throw new Error(`unknown figure kind ${(spec as FigureSpec).kind}`);
  }
}
