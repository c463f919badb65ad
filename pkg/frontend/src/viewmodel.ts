/**
 * Pure transforms from service payloads to render-ready view models.
 * Everything displayed comes verbatim from a service response; no inference
 * logic lives in the client.
 */

import type { AttentionPayload, ProvenanceSpan, ResultPayload, TurnPayload } from "./api.js";

export interface TokenView {
  text: string;
  copied: boolean;
  sourceTurn: number | null;
  /** turns since the copied segment first appeared; keys the highlight color */
  age: number | null;
}

export interface HeatmapCell {
  step: number;
  column: number;
  alpha: number;
}

export interface HeatmapView {
  columnTokens: { turn: number; token: string }[];
  stepLabels: string[];
  cells: HeatmapCell[];
}

export interface TableView {
  columns: string[];
  rows: (string | number | null)[][];
  totalRows: number;
  truncated: boolean;
  emptyMessage: string | null;
  failed: boolean;
}

export interface TurnView {
  turnIndex: number;
  utterance: string;
  tokens: TokenView[];
  table: TableView;
  heatmap: HeatmapView;
  status: "ok" | "execution failed";
}

/** Expand provenance spans into one view per SQL token; spans must tile the
 * token sequence exactly. */
export function tokenViews(
  sqlTokens: string[],
  provenance: ProvenanceSpan[],
  turnIndex: number,
): TokenView[] {
  const sorted = [...provenance].sort((a, b) => a.start - b.start);
  let expected = 0;
  const out: TokenView[] = [];
  for (const span of sorted) {
    if (span.start !== expected) {
      throw new Error(`provenance spans do not tile: gap at token ${expected}`);
    }
    for (let i = span.start; i < span.end; i++) {
      out.push({
        text: sqlTokens[i],
        copied: span.source_turn !== null,
        sourceTurn: span.source_turn,
        age: span.source_turn !== null ? turnIndex - span.source_turn : null,
      });
    }
    expected = span.end;
  }
  if (expected !== sqlTokens.length) {
    throw new Error(`provenance spans do not tile: ended at ${expected}/${sqlTokens.length}`);
  }
  return out;
}

export function heatmapView(attention: AttentionPayload): HeatmapView {
  const cells: HeatmapCell[] = [];
  attention.steps.forEach((row, step) => {
    row.forEach((alpha, column) => {
      cells.push({ step, column, alpha });
    });
  });
  return {
    columnTokens: attention.tokens,
    stepLabels: attention.steps.map((_, i) => `${i + 1}`),
    cells,
  };
}

export function tableView(result: ResultPayload): TableView {
  const empty = !result.execution_failed && result.total_rows === 0;
  return {
    columns: result.columns,
    rows: result.rows,
    totalRows: result.total_rows,
    truncated: result.rows.length < result.total_rows,
    emptyMessage: empty ? "No flights returned" : null,
    failed: result.execution_failed,
  };
}

export function turnView(payload: TurnPayload): TurnView {
  return {
    turnIndex: payload.turn_index,
    utterance: payload.utterance.raw,
    tokens: tokenViews(payload.sql.tokens, payload.provenance, payload.turn_index),
    table: tableView(payload.result),
    heatmap: heatmapView(payload.attention),
    status: payload.result.execution_failed ? "execution failed" : "ok",
  };
}

export function conversationView(turns: TurnPayload[]): TurnView[] {
  return turns.map(turnView);
}

/** Linear map from attention probability to cell opacity. */
export function cellOpacity(alpha: number): number {
  return Math.max(0, Math.min(1, alpha));
}

/** Highlight color per segment age (turns since first appearance). */
export function ageColor(age: number): string {
  const palette = ["#9ad1f5", "#b5e3b5", "#f5d59a", "#e8b3d8", "#d0c2f0"];
  return palette[Math.min(Math.max(age, 0), palette.length - 1)];
}
