/** Wire types mirroring the matchbench HTTP API payloads. */

export interface CandidateDict {
  source: string;
  target: string;
  scores: Record<string, number>;
  aggregate: number;
  status: string; // suggested | accepted | rejected | flagged | auto_accepted
  note: string | null;
}

export interface WeightsDict {
  weights: Record<string, number>;
  learning_rate: number;
}

export interface CandidatePage {
  candidates: CandidateDict[];
  total: number;
  cutoff: number;
  weights: WeightsDict;
}

export interface MatcherDict {
  id: string;
  kind: string; // builtin | external
  command: string[] | null;
  top_k: number;
  status: string; // ready | running | failed
  failure_reason: string | null;
}

export interface MatcherListing {
  matchers: MatcherDict[];
  weights: WeightsDict;
}

export interface MatcherMetrics {
  precision_at_1: number;
  recall_at_k: number;
  f1: number;
  mrr: number;
}

export interface MetricsReport {
  per_matcher: Record<string, MatcherMetrics>;
  evaluated_sources: number;
  k: number;
  snapshot_seq: number;
  trivial_accepts: number;
  manual_accepts: number;
  flag?: string;
}

export interface ConsensusSubset {
  matchers: string[];
  count: number;
}

export interface ConsensusReport {
  subsets: ConsensusSubset[];
  k: number;
  snapshot_seq: number;
}

export interface BreakdownReport {
  per_matcher: Record<string, Record<string, number>>;
  buckets: string[];
  evaluated_sources: number;
  snapshot_seq: number;
}

export interface JobStatus {
  job_id: string | null;
  session_id: string;
  phase: string; // pending | profiling | matching | done | failed | idle
  progress: Record<string, number>;
  error: string | null;
}

export interface DecisionResult {
  event_seq: number | null;
  candidate: CandidateDict;
  weights: WeightsDict;
}

export interface ProfileDict {
  attribute: string;
  inferred_type: string;
  categorical_frequencies: [string, number][] | null;
  numeric_histogram: { bin_edges: number[]; counts: number[] } | null;
  min: number | null;
  max: number | null;
  sample_values: string[];
  null_count: number;
}

export interface ProfileResponse {
  profile: ProfileDict;
  group: string | null;
}

export interface OntologyDict {
  groups: { label: string; members: string[] }[];
  properties: Record<string, Record<string, string>>;
}

export interface ValueMappingDict {
  source_attr: string;
  target_attr: string;
  pairs: { from: string; to: string; similarity: number }[];
  unmapped_source: string[];
  transform: { scale: number; offset: number } | null;
}

export interface ValueMapResponse {
  stored: boolean;
  mapping: ValueMappingDict;
}

export interface CriterionDict {
  name: string;
  score: number | null;
  evidence: string;
}

export interface ExplanationDict {
  source: string;
  target: string;
  criteria: CriterionDict[];
  diagnosis: string; // likely_match | likely_mismatch | undetermined
  narrative: string | null;
  warning: string | null;
}

export interface ProvenanceEventDict {
  seq: number;
  timestamp: string;
  actor: string;
  op: string;
  payload: Record<string, unknown>;
}

export interface ImportReport {
  kind: string;
  applied: number;
  skipped: { source?: string; target?: string; reason: string }[];
}
