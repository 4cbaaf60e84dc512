export { readCsv, readRates, readInp, readDropped, readCdf } from "./csv.js";
export type { RateRow, InpRow, DroppedRow, CdfRow } from "./csv.js";
export { histogram, pmf, ecdf, stepPoints } from "./stats.js";
export { renderSvg, niceTicks } from "./svg.js";
export type { Panel, Series, VLine } from "./svg.js";
export {
  FIGURE_KINDS,
  NOISE_FLOOR_DBW,
  MissingSeriesError,
  buildFigure,
  discoverSeries,
} from "./figures.js";
export type { FigureKind, FigureSpec, SeriesKey } from "./figures.js";
export { main } from "./cli.js";
