// Shapes of the JSON the screening service sends and receives. The UI holds
// no opinion of its own: everything rendered traces back to one of these.

export type QuestionKind = "bool" | "enum" | "number" | "text";

export interface Question {
  attribute: string;
  prompt: string;
  kind: QuestionKind;
  values: string[];
  unit: string | null;
  dimension: string;
  goal: string;
}

export interface RecordedAnswer {
  attribute: string;
  value: unknown;
  cf: number;
}

export interface SessionState {
  session_id: string;
  status: "in_progress" | "complete";
  answered: number;
  next_question: Question | null;
  // present on GET /sessions/{id}
  answers?: Record<string, { value: unknown; cf: number }>;
}

export interface AnswerAck extends SessionState {
  recorded: RecordedAnswer;
}

export interface NextQuestionOut {
  next_question: Question | null;
  status: "in_progress" | "complete";
}

export interface DimensionCaveat {
  symbol: string;
  cf: number;
  rules: string[];
}

export interface Caveat extends DimensionCaveat {
  dimension: string;
}

export interface DimensionOut {
  dimension: string;
  verdict: string;
  cf: number;
  caveats: DimensionCaveat[];
  pending: string[];
}

export interface RiskRow {
  risk: string;
  likelihood: string;
  impact: string;
  serious: boolean;
}

export interface UnresolvedOut {
  attribute: string;
  prompt: string;
  dimension: string;
  goal: string;
}

export interface Report {
  kb: { name: string; version: string };
  status: string;
  verdict: string;
  cf: number;
  dimensions: DimensionOut[];
  caveats: Caveat[];
  figures: Record<string, unknown>;
  risk_register: RiskRow[];
  unresolved: UnresolvedOut[];
  notes: string[];
  rule_citations: Record<string, string>;
}

export interface WhyStep {
  attribute: string;
  rule: string;
  citation: string;
}

export interface WhyOut {
  attribute: string;
  chain: WhyStep[];
}

export interface ProofNode {
  attribute: string;
  value: unknown;
  cf: number;
  source: string;
  children?: ProofNode[];
}

export interface HowOut {
  attribute: string;
  proofs: ProofNode[];
}

export interface WhatIfSide {
  verdict: string;
  cf: number;
  figures: Record<string, unknown>;
}

export interface WhatIfOut {
  baseline: WhatIfSide;
  variant: WhatIfSide;
  changed: Record<string, { before: unknown; after: unknown }>;
}

export interface KbMeta {
  name: string;
  version: string;
  cf_threshold: number;
  attributes: number;
  askable: number;
  rules: number;
  computes: number;
  fixtures: string[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail: unknown;
}
