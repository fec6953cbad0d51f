/** Page wiring: events -> view-model transitions -> render. */

import { ApiError, requestRecommendations, uploadSet } from "./api.js";
import type { Elements } from "./render.js";
import { render } from "./render.js";
import type { Direction, ShowMode, UiState } from "./state.js";
import {
  applyRecommendations,
  applyRequestFailure,
  applyUploadFailure,
  applyUploadSuccess,
  beginRequest,
  canRequest,
  initialState,
  selectedObjectives,
  setDirection,
  setShowMode,
  toggleObjective,
} from "./state.js";

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    return error.detail;
  }
  return error instanceof Error ? error.message : String(error);
}

function element<T extends Element>(id: string): T {
  const found = document.getElementById(id);
  if (found === null) {
    throw new Error(`missing element #${id}`);
  }
  return found as unknown as T;
}

function start(): void {
  let state: UiState = initialState();
  const els: Elements = {
    banner: element<HTMLElement>("banner"),
    error: element<HTMLElement>("error"),
    table: element<HTMLTableElement>("results"),
    scatter: element<SVGSVGElement>("scatter"),
    scatterCaption: element<HTMLElement>("scatter-caption"),
    requestButton: element<HTMLButtonElement>("request"),
  };
  const update = (next: UiState): void => {
    state = next;
    render(state, els);
  };

  const fileInput = element<HTMLInputElement>("file-input");
  const dropZone = element<HTMLElement>("drop-zone");

  async function handleFile(file: File): Promise<void> {
    try {
      const payload = await uploadSet(await file.text());
      update(applyUploadSuccess(state, file.name, payload.set_id));
    } catch (error) {
      update(applyUploadFailure(state, describe(error)));
    }
  }

  fileInput.addEventListener("change", () => {
    const file = fileInput.files?.[0];
    if (file !== undefined) {
      void handleFile(file);
    }
  });
  dropZone.addEventListener("dragover", (event) => {
    event.preventDefault();
    dropZone.classList.add("dragging");
  });
  dropZone.addEventListener("dragleave", () => {
    dropZone.classList.remove("dragging");
  });
  dropZone.addEventListener("drop", (event) => {
    event.preventDefault();
    dropZone.classList.remove("dragging");
    const file = event.dataTransfer?.files?.[0];
    if (file !== undefined) {
      void handleFile(file);
    }
  });

  for (const choice of state.objectives) {
    const checkbox = element<HTMLInputElement>(`objective-${choice.target}`);
    checkbox.addEventListener("change", () => {
      update(toggleObjective(state, choice.target));
    });
    const select = element<HTMLSelectElement>(`direction-${choice.target}`);
    select.value = choice.direction;
    select.addEventListener("change", () => {
      update(setDirection(state, choice.target, select.value as Direction));
    });
  }

  for (const mode of ["all", "nondominated"] as const) {
    element<HTMLInputElement>(`show-${mode}`).addEventListener("change", () => {
      // The toggle is a pure client-side filter; no new request.
      update(setShowMode(state, mode as ShowMode));
    });
  }

  els.requestButton.addEventListener("click", () => {
    if (!canRequest(state) || state.setId === null) {
      return;
    }
    const begun = beginRequest(state);
    update(begun.state);
    const body = {
      set_id: state.setId,
      objectives: selectedObjectives(state),
      show_all: true,
    };
    requestRecommendations(body).then(
      (payload) => update(applyRecommendations(state, payload, begun.token)),
      (error: unknown) =>
        update(applyRequestFailure(state, describe(error), begun.token)),
    );
  });

  render(state, els);
}

document.addEventListener("DOMContentLoaded", start);
