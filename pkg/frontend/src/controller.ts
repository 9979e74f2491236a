/** Workspace controller: owns the view state plus verbatim copies of the
 * latest server payloads. Server authority is structural — the only way any
 * panel changes is a confirmed API response followed by a fresh fetch. */

import { ApiError, MatchbenchClient, MatcherRegistration } from "./api.js";
import {
  ViewState,
  applyPhase,
  clearBanner,
  initialViewState,
  raiseBanner,
  selectCandidate,
  setCutoff,
  setGroup,
  setSession,
  toggleDeveloperMode,
} from "./state.js";
import type {
  BreakdownReport,
  CandidatePage,
  ConsensusReport,
  JobStatus,
  MatcherListing,
  MetricsReport,
  ProvenanceEventDict,
} from "./types.js";
import { submitMatcher, RegistrationResult } from "./editor.js";

export interface Snapshot {
  state: ViewState;
  page: CandidatePage | null;
  metrics: MetricsReport | null;
  breakdown: BreakdownReport | null;
  consensus: ConsensusReport | null;
  matchers: MatcherListing | null;
  provenance: ProvenanceEventDict[];
  status: JobStatus | null;
}

export class Workspace {
  state: ViewState = initialViewState();
  page: CandidatePage | null = null;
  metrics: MetricsReport | null = null;
  breakdown: BreakdownReport | null = null;
  consensus: ConsensusReport | null = null;
  matchers: MatcherListing | null = null;
  provenance: ProvenanceEventDict[] = [];
  status: JobStatus | null = null;

  constructor(readonly client: MatchbenchClient) {}

  snapshot(): Snapshot {
    return {
      state: this.state,
      page: this.page,
      metrics: this.metrics,
      breakdown: this.breakdown,
      consensus: this.consensus,
      matchers: this.matchers,
      provenance: this.provenance,
      status: this.status,
    };
  }

  private fail(err: unknown): void {
    // non-blocking banner; the stale view is retained untouched
    const message = err instanceof ApiError ? err.detail : String(err);
    this.state = raiseBanner(this.state, message);
  }

  async openSession(sessionId: string): Promise<void> {
    this.state = setSession(this.state, sessionId);
    this.page = null;
    this.metrics = null;
    this.breakdown = null;
    this.consensus = null;
    this.matchers = null;
    this.provenance = [];
    await this.pollStatus();
    if (this.status && this.status.phase === "done") {
      await this.refresh();
    }
  }

  async pollStatus(): Promise<void> {
    if (!this.state.sessionId) return;
    try {
      this.status = await this.client.status(this.state.sessionId);
      this.state = applyPhase(this.state, this.status.phase);
    } catch (err) {
      this.fail(err);
    }
  }

  /** Re-fetch everything the panels show from the server. */
  async refresh(): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    try {
      const [page, metrics, breakdown, consensus, matchers, provenance] = await Promise.all([
        this.client.candidates(sessionId, {
          cutoff: this.state.cutoff,
          group: this.state.group ?? undefined,
          source: this.state.sourceFilter ?? undefined,
        }),
        this.client.metrics(sessionId),
        this.client.breakdown(sessionId),
        this.client.consensus(sessionId),
        this.client.matchers(sessionId),
        this.client.provenance(sessionId),
      ]);
      this.page = page;
      this.metrics = metrics;
      this.breakdown = breakdown;
      this.consensus = consensus;
      this.matchers = matchers;
      this.provenance = provenance.events;
      this.state = clearBanner(this.state);
    } catch (err) {
      this.fail(err);
    }
  }

  async changeCutoff(cutoff: number): Promise<void> {
    this.state = setCutoff(this.state, cutoff);
    await this.refresh();
  }

  async changeGroup(group: string | null): Promise<void> {
    this.state = setGroup(this.state, group);
    await this.refresh();
  }

  select(source: string, target: string): void {
    this.state = selectCandidate(this.state, source, target);
  }

  toggleDeveloper(): void {
    this.state = toggleDeveloperMode(this.state);
  }

  /** Accept/reject/flag/note. The view only mutates after the server has
   * confirmed the decision; on failure nothing moves except the banner. */
  async decide(source: string, target: string, action: string, note?: string): Promise<boolean> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return false;
    try {
      await this.client.decide(sessionId, { source, target, action, note });
    } catch (err) {
      this.fail(err);
      return false;
    }
    await this.refresh();
    return true;
  }

  async registerMatcher(registration: MatcherRegistration): Promise<RegistrationResult> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return { ok: false, error: "no session open" };
    const existing = this.matchers?.matchers.map((m) => m.id) ?? [];
    const result = await submitMatcher(this.client, sessionId, registration, existing);
    if (result.ok) {
      await this.refresh();
    }
    return result;
  }

  async removeMatcher(matcherId: string): Promise<boolean> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return false;
    try {
      await this.client.removeMatcher(sessionId, matcherId);
    } catch (err) {
      this.fail(err);
      return false;
    }
    await this.refresh();
    return true;
  }
}
