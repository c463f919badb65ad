/** DOM builders; every value shown originates in a service payload. */

import { ageColor, cellOpacity, HeatmapView, TableView, TokenView, TurnView } from "./viewmodel.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderSql(tokens: TokenView[]): HTMLElement {
  const box = el("div", "sql");
  tokens.forEach((token, i) => {
    const span = el("span", token.copied ? "tok copied" : "tok", token.text);
    if (token.copied && token.sourceTurn !== null) {
      span.style.backgroundColor = ageColor(token.age ?? 0);
      span.title = `copied from turn ${token.sourceTurn}`;
      span.dataset.sourceTurn = String(token.sourceTurn);
    }
    box.appendChild(span);
    if (i < tokens.length - 1) box.appendChild(document.createTextNode(" "));
  });
  return box;
}

export function renderTable(view: TableView): HTMLElement {
  if (view.failed) return el("div", "table-status failed", "query failed to execute");
  if (view.emptyMessage) return el("div", "table-status empty", view.emptyMessage);
  const wrap = el("div", "table-wrap");
  const table = el("table", "results");
  const head = el("tr");
  view.columns.forEach((c) => head.appendChild(el("th", undefined, c)));
  table.appendChild(head);
  view.rows.forEach((row) => {
    const tr = el("tr");
    row.forEach((value) => tr.appendChild(el("td", undefined, value === null ? "" : String(value))));
    table.appendChild(tr);
  });
  wrap.appendChild(table);
  const note = view.truncated
    ? `showing ${view.rows.length} of ${view.totalRows} rows`
    : `${view.totalRows} rows`;
  wrap.appendChild(el("div", "row-count", note));
  return wrap;
}

export function renderHeatmap(view: HeatmapView): HTMLElement {
  const box = el("div", "heatmap");
  const grid = el("div", "heatmap-grid");
  grid.style.gridTemplateColumns = `repeat(${view.columnTokens.length}, 14px)`;
  view.cells.forEach((cell) => {
    const div = el("div", "cell");
    div.style.opacity = String(cellOpacity(cell.alpha));
    div.title = `step ${cell.step + 1} / ${view.columnTokens[cell.column].token}: ${cell.alpha.toFixed(3)}`;
    grid.appendChild(div);
  });
  const labels = el("div", "heatmap-labels");
  view.columnTokens.forEach((t) => labels.appendChild(el("span", "hm-label", t.token)));
  box.appendChild(grid);
  box.appendChild(labels);
  return box;
}

export function renderTurn(view: TurnView): HTMLElement {
  const card = el("section", "turn");
  card.dataset.turn = String(view.turnIndex);
  const user = el("div", "utterance", view.utterance);
  card.appendChild(user);
  card.appendChild(renderSql(view.tokens));
  card.appendChild(renderTable(view.table));
  const toggle = el("button", "hm-toggle", "attention");
  const heat = renderHeatmap(view.heatmap);
  heat.style.display = "none";
  toggle.addEventListener("click", () => {
    heat.style.display = heat.style.display === "none" ? "block" : "none";
  });
  card.appendChild(toggle);
  card.appendChild(heat);
  return card;
}

export function renderError(message: string): HTMLElement {
  return el("div", "error", message);
}
