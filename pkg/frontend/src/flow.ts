import type { BiasReport, ReportRequest } from "./types";

export type StepId = "dataset" | "check" | "mitigate" | "compare";

export interface ExplorerState {
  step: StepId;
  dataset: string | null;
  protectedAttr: string | null;
  algorithm: string | null;
  baseline: BiasReport | null;
  mitigated: BiasReport | null;
  loading: boolean;
  error: string | null;
  seq: number;
}

export type Action =
  | { kind: "select-dataset"; dataset: string; protectedAttr: string }
  | { kind: "select-algorithm"; algorithm: string }
  | { kind: "clear-algorithm" }
  | { kind: "go-to"; step: StepId }
  | { kind: "report-loaded"; seq: number; report: BiasReport }
  | { kind: "report-failed"; seq: number; message: string };

export interface Transition {
  state: ExplorerState;
  // at most one service request per action; null means no network traffic
  request: ReportRequest | null;
}

export const REPORT_SEED = 0;

export function initialState(): ExplorerState {
  return {
    step: "dataset",
    dataset: null,
    protectedAttr: null,
    algorithm: null,
    baseline: null,
    mitigated: null,
    loading: false,
    error: null,
    seq: 0,
  };
}

function stay(state: ExplorerState): Transition {
  return { state, request: null };
}

function stepReachable(state: ExplorerState, target: StepId): boolean {
  switch (target) {
    case "dataset":
      return true;
    case "check":
    case "mitigate":
      return state.baseline !== null;
    case "compare":
      return (
        state.algorithm !== null &&
        state.mitigated !== null &&
        state.mitigated.algorithm === state.algorithm
      );
  }
}

export function step(state: ExplorerState, action: Action): Transition {
  switch (action.kind) {
    case "select-dataset": {
      const unchanged =
        action.dataset === state.dataset &&
        action.protectedAttr === state.protectedAttr &&
        state.baseline !== null;
      if (unchanged) return stay({ ...state, step: "check" });
      const seq = state.seq + 1;
      return {
        state: {
          ...state,
          step: "check",
          dataset: action.dataset,
          protectedAttr: action.protectedAttr,
          algorithm: null,
          baseline: null,
          mitigated: null,
          loading: true,
          error: null,
          seq,
        },
        request: {
          dataset: action.dataset,
          protected: action.protectedAttr,
          seed: REPORT_SEED,
        },
      };
    }

    case "select-algorithm": {
      if (state.dataset === null || state.protectedAttr === null) return stay(state);
      const unchanged =
        action.algorithm === state.algorithm &&
        state.mitigated !== null &&
        state.mitigated.algorithm === action.algorithm;
      if (unchanged) return stay({ ...state, step: "compare" });
      const seq = state.seq + 1;
      return {
        state: {
          ...state,
          step: "compare",
          algorithm: action.algorithm,
          mitigated: null,
          loading: true,
          error: null,
          seq,
        },
        request: {
          dataset: state.dataset,
          protected: state.protectedAttr,
          algorithm: action.algorithm,
          seed: REPORT_SEED,
        },
      };
    }

    case "clear-algorithm":
      return stay({ ...state, algorithm: null, step: "check" });

    case "go-to":
      if (!stepReachable(state, action.step)) return stay(state);
      return stay({ ...state, step: action.step });

    case "report-loaded": {
      if (action.seq !== state.seq) return stay(state); // superseded request
      const slot = action.report.algorithm === null ? "baseline" : "mitigated";
      return stay({
        ...state,
        [slot]: action.report,
        loading: false,
        error: null,
      });
    }

    case "report-failed":
      if (action.seq !== state.seq) return stay(state);
      // keep whatever was rendered before; just surface the message
      return stay({ ...state, loading: false, error: action.message });
  }
}
