/** DOM rendering from the view-model.
 *
 * Everything here is a projection of UiState; no state lives in the DOM.
 * Numbers are printed with cellText (the payload value verbatim); the only
 * arithmetic is pixel placement for the scatter.
 */

import type { UiState } from "./state.js";
import {
  bannerText,
  cellText,
  canRequest,
  rowCells,
  scatterAxes,
  scatterPoints,
  visibleRows,
} from "./state.js";

export interface Elements {
  banner: HTMLElement;
  error: HTMLElement;
  table: HTMLTableElement;
  scatter: SVGSVGElement;
  scatterCaption: HTMLElement;
  requestButton: HTMLButtonElement;
}

export function renderBanner(state: UiState, el: HTMLElement): void {
  el.textContent = bannerText(state);
}

export function renderError(state: UiState, el: HTMLElement): void {
  el.textContent = state.error ?? "";
  el.hidden = state.error === null;
}

export function renderTable(state: UiState, table: HTMLTableElement): void {
  table.innerHTML = "";
  const response = state.response;
  if (response === null) {
    return;
  }
  const thead = table.createTHead();
  const headRow = thead.insertRow();
  for (const column of response.columns) {
    const th = document.createElement("th");
    th.textContent = column;
    headRow.appendChild(th);
  }
  const tbody = table.createTBody();
  for (const row of visibleRows(state)) {
    const tr = tbody.insertRow();
    if (row.nondominated) {
      tr.classList.add("nondominated");
    }
    for (const cell of rowCells(row, response.columns)) {
      tr.insertCell().textContent = cellText(cell);
    }
  }
}

const PLOT = { width: 560, height: 320, pad: 42 };

function scale(value: number, lo: number, hi: number, a: number, b: number): number {
  if (hi === lo) {
    return (a + b) / 2;
  }
  return a + ((value - lo) / (hi - lo)) * (b - a);
}

export function renderScatter(
  state: UiState,
  svg: SVGSVGElement,
  caption: HTMLElement,
): void {
  const SVG_NS = "http://www.w3.org/2000/svg";
  svg.innerHTML = "";
  const points = scatterPoints(state);
  const axes = scatterAxes(state);
  const visible = points !== null && axes !== null;
  svg.style.display = visible ? "" : "none";
  caption.hidden = !visible;
  if (!visible || points === null || axes === null) {
    caption.textContent = "";
    return;
  }
  svg.setAttribute("viewBox", `0 0 ${PLOT.width} ${PLOT.height}`);
  const xs = points.map((p) => p[0]);
  const ys = points.map((p) => p[1]);
  const [xLo, xHi] = [Math.min(...xs), Math.max(...xs)];
  const [yLo, yHi] = [Math.min(...ys), Math.max(...ys)];
  for (const [x, y, flagged] of points) {
    const circle = document.createElementNS(SVG_NS, "circle");
    const cx = scale(x, xLo, xHi, PLOT.pad, PLOT.width - PLOT.pad);
    const cy = scale(y, yLo, yHi, PLOT.height - PLOT.pad, PLOT.pad);
    circle.setAttribute("cx", cx.toFixed(1));
    circle.setAttribute("cy", cy.toFixed(1));
    circle.setAttribute("r", flagged ? "5" : "3.5");
    circle.classList.add(flagged ? "point-nondominated" : "point-dominated");
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${axes[0]}=${cellText(x)}, ${axes[1]}=${cellText(y)}`;
    circle.appendChild(title);
    svg.appendChild(circle);
  }
  caption.textContent =
    `${axes[0]} (x: ${cellText(xLo)} to ${cellText(xHi)}) vs ` +
    `${axes[1]} (y: ${cellText(yLo)} to ${cellText(yHi)}); ` +
    "filled points are nondominated.";
}

export function render(state: UiState, els: Elements): void {
  renderBanner(state, els.banner);
  renderError(state, els.error);
  renderTable(state, els.table);
  renderScatter(state, els.scatter, els.scatterCaption);
  els.requestButton.disabled = !canRequest(state);
}
