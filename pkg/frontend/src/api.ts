/** Typed client for the recommendation service's /api endpoints.
 *
 * Every function takes an optional fetch implementation so contract tests
 * can stub the service; nothing here interprets the numbers it transports.
 */

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface SetDescriptorJson {
  min_len: number;
  max_len: number;
  median_len: number;
  stdev_len: number;
  outlier_count: number;
  unique_count: number;
  ngram_freqs: Record<string, number>;
}

export interface UploadResponse {
  schema_version: number;
  set_id: string;
  descriptor: SetDescriptorJson;
  warnings: string[];
}

export interface RowParamsJson {
  increment: number;
  mutation_probability: [number, number, number];
  mutation_number: number;
  parent_fraction: number;
  start_population_factor: number;
}

export interface RecommendationRowJson {
  params: RowParamsJson;
  predicted: Record<string, number>;
  nondominated: boolean;
}

export type ScatterPointJson = [number, number, boolean];

export interface RecommendationResponse {
  schema_version: number;
  columns: string[];
  objectives: [string, string][];
  rows: RecommendationRowJson[];
  scatter: ScatterPointJson[] | null;
  model_info: { family: string; corpus_hash: string | null };
}

export interface GridOverrideJson {
  n_per_dim: number;
  seed: number;
}

export interface RecommendationRequestJson {
  set_id: string;
  objectives: string[];
  grid?: GridOverrideJson;
  show_all: boolean;
}

/** Service-reported failure; `detail` is the server's message verbatim. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function raiseFor(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body: unknown = await response.json();
    if (
      typeof body === "object" &&
      body !== null &&
      typeof (body as { detail?: unknown }).detail === "string"
    ) {
      detail = (body as { detail: string }).detail;
    }
  } catch {
    // non-JSON body: fall back to the status text
  }
  throw new ApiError(response.status, detail);
}

export async function uploadSet(
  content: string,
  fetchFn: FetchLike = globalThis.fetch,
): Promise<UploadResponse> {
  const response = await fetchFn("/api/sets", {
    method: "POST",
    headers: { "content-type": "text/plain; charset=utf-8" },
    body: content,
  });
  if (!response.ok) {
    await raiseFor(response);
  }
  return (await response.json()) as UploadResponse;
}

export async function requestRecommendations(
  request: RecommendationRequestJson,
  fetchFn: FetchLike = globalThis.fetch,
): Promise<RecommendationResponse> {
  const response = await fetchFn("/api/recommendations", {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(request),
  });
  if (!response.ok) {
    await raiseFor(response);
  }
  return (await response.json()) as RecommendationResponse;
}
