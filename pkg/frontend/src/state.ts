/** Pure view-model for the analyst console.
 *
 * All state transitions and derived views live here, DOM-free, so the
 * contract tests can drive the exact flows the page performs.  The UI does
 * no prediction math: every displayed number is carried verbatim from a
 * service response.
 */

import type {
  RecommendationResponse,
  RecommendationRowJson,
  ScatterPointJson,
} from "./api.js";

export const OUTCOME_TARGETS = [
  "chi",
  "dbi",
  "non_clustered",
  "num_clusters",
  "elapsed_seconds",
] as const;

export type Target = (typeof OUTCOME_TARGETS)[number];
export type Direction = "min" | "max";
export type ShowMode = "all" | "nondominated";

/** Mirrors the service's ObjectiveSpec defaults. */
export const DEFAULT_DIRECTIONS: Record<Target, Direction> = {
  chi: "max",
  dbi: "min",
  non_clustered: "min",
  num_clusters: "min",
  elapsed_seconds: "min",
};

export interface ObjectiveChoice {
  target: Target;
  selected: boolean;
  direction: Direction;
}

export interface UiState {
  setId: string | null;
  filename: string | null;
  objectives: ObjectiveChoice[];
  showMode: ShowMode;
  response: RecommendationResponse | null;
  error: string | null;
  /** Token of the most recent request; stale responses are dropped. */
  requestToken: number;
}

export function initialState(): UiState {
  return {
    setId: null,
    filename: null,
    objectives: OUTCOME_TARGETS.map((target) => ({
      target,
      selected: false,
      direction: DEFAULT_DIRECTIONS[target],
    })),
    showMode: "all",
    response: null,
    error: null,
    requestToken: 0,
  };
}

export function applyUploadSuccess(
  state: UiState,
  filename: string,
  setId: string,
): UiState {
  // A new set makes any previous table stale; clear it until the next
  // recommendation request.
  return { ...state, setId, filename, response: null, error: null };
}

export function applyUploadFailure(state: UiState, message: string): UiState {
  // Failure isolation: the previous set and table stay usable.
  return { ...state, error: message };
}

export function toggleObjective(state: UiState, target: Target): UiState {
  return {
    ...state,
    objectives: state.objectives.map((o) =>
      o.target === target ? { ...o, selected: !o.selected } : o,
    ),
  };
}

export function setDirection(
  state: UiState,
  target: Target,
  direction: Direction,
): UiState {
  return {
    ...state,
    objectives: state.objectives.map((o) =>
      o.target === target ? { ...o, direction } : o,
    ),
  };
}

export function setShowMode(state: UiState, showMode: ShowMode): UiState {
  return { ...state, showMode };
}

/** Objective strings for the request body, direction always explicit. */
export function selectedObjectives(state: UiState): string[] {
  return state.objectives
    .filter((o) => o.selected)
    .map((o) => `${o.target}:${o.direction}`);
}

/** The request button's enabled state: a set plus at least one objective. */
export function canRequest(state: UiState): boolean {
  return state.setId !== null && selectedObjectives(state).length > 0;
}

export function beginRequest(state: UiState): { state: UiState; token: number } {
  const token = state.requestToken + 1;
  return { state: { ...state, requestToken: token, error: null }, token };
}

export function applyRecommendations(
  state: UiState,
  payload: RecommendationResponse,
  token: number,
): UiState {
  if (token !== state.requestToken) {
    return state; // superseded by a newer request
  }
  return { ...state, response: payload, error: null };
}

export function applyRequestFailure(
  state: UiState,
  message: string,
  token: number,
): UiState {
  if (token !== state.requestToken) {
    return state;
  }
  return { ...state, error: message };
}

export function bannerText(state: UiState): string {
  return state.filename === null
    ? "No sequence file uploaded yet."
    : `The last sequence file was ${state.filename}.`;
}

/** Rows to display under the current show mode (a pure client-side filter). */
export function visibleRows(state: UiState): RecommendationRowJson[] {
  if (state.response === null) {
    return [];
  }
  if (state.showMode === "all") {
    return state.response.rows;
  }
  return state.response.rows.filter((row) => row.nondominated);
}

/** Scatter data when the service sent it (exactly two objectives). */
export function scatterPoints(state: UiState): ScatterPointJson[] | null {
  return state.response?.scatter ?? null;
}

export function scatterAxes(state: UiState): [string, string] | null {
  const response = state.response;
  if (response === null || response.scatter === null) {
    return null;
  }
  const [x, y] = response.objectives;
  return [x[0], y[0]];
}

/** A displayed cell is the payload value itself, never a reformatted one. */
export function cellText(value: number | string | boolean): string {
  return String(value);
}

/** Table cells for one row in the service's column order.
 *
 * The mutation-probability triple renders as a single sub/del/ins cell so
 * the table keeps one column per input parameter, matching the CSV export.
 */
export function rowCells(
  row: RecommendationRowJson,
  columns: string[],
): (number | string)[] {
  const params = row.params;
  const inputs: Record<string, number | string> = {
    increment: params.increment,
    mutation_probability: params.mutation_probability.join("/"),
    mutation_number: params.mutation_number,
    parent_fraction: params.parent_fraction,
    start_population_factor: params.start_population_factor,
  };
  return columns.map((column) =>
    column in inputs ? inputs[column] : row.predicted[column],
  );
}
