/** Client-local view state. Only presentation concerns live here; everything
 * durable (decisions, matchers, value maps) belongs to the server. */

export interface ViewState {
  sessionId: string | null;
  cutoff: number; // heatmap visibility slider
  group: string | null; // active ontology group filter
  sourceFilter: string | null;
  selected: { source: string; target: string } | null;
  developerMode: boolean;
  pollMs: number; // 0 = polling paused
  banner: string | null; // non-blocking error banner, stale view retained
}

export const ACTIVE_POLL_MS = 2000;
export const ACTIVE_PHASES = new Set(["pending", "profiling", "matching"]);

export function initialViewState(): ViewState {
  return {
    sessionId: null,
    cutoff: 0.4,
    group: null,
    sourceFilter: null,
    selected: null,
    developerMode: false,
    pollMs: 0,
    banner: null,
  };
}

export function setSession(state: ViewState, sessionId: string): ViewState {
  return { ...initialViewState(), sessionId, developerMode: state.developerMode };
}

export function setCutoff(state: ViewState, cutoff: number): ViewState {
  if (!Number.isFinite(cutoff) || cutoff < 0) {
    return state;
  }
  return { ...state, cutoff };
}

export function setGroup(state: ViewState, group: string | null): ViewState {
  return { ...state, group, selected: null };
}

export function setSourceFilter(state: ViewState, source: string | null): ViewState {
  return { ...state, sourceFilter: source };
}

export function selectCandidate(state: ViewState, source: string, target: string): ViewState {
  return { ...state, selected: { source, target } };
}

export function clearSelection(state: ViewState): ViewState {
  return { ...state, selected: null };
}

export function toggleDeveloperMode(state: ViewState): ViewState {
  return { ...state, developerMode: !state.developerMode };
}

/** Poll every 2s while a job is running; pause when idle/done/failed. */
export function pollCadence(phase: string): number {
  return ACTIVE_PHASES.has(phase) ? ACTIVE_POLL_MS : 0;
}

export function applyPhase(state: ViewState, phase: string): ViewState {
  return { ...state, pollMs: pollCadence(phase) };
}

/** API failures surface as a banner; the stale view stays put. */
export function raiseBanner(state: ViewState, message: string): ViewState {
  return { ...state, banner: message };
}

export function clearBanner(state: ViewState): ViewState {
  return state.banner === null ? state : { ...state, banner: null };
}
