/** Shared types mirroring the /api/v1 review contract. */

export type Judgment = "correct" | "over-masked" | "under-masked";

export const JUDGMENTS: Judgment[] = ["correct", "over-masked", "under-masked"];

export interface Progress {
  assigned: number;
  judged: number;
}

export interface NextCard {
  done: false;
  record_id: string;
  masked_text: string;
  label: string;
  progress: Progress;
}

export interface QueueDone {
  done: true;
  progress: Progress;
}

export type NextResponse = NextCard | QueueDone;

export interface VerdictPayload {
  record_id: string;
  reviewer_id: string;
  judgment: Judgment;
  note?: string;
}

export interface SubmitResponse {
  ok: boolean;
  progress: Progress;
}

export interface ProgressResponse {
  reviewers: Record<string, Progress>;
  shared_total: number;
  shared_judged: number;
}

export interface AgreementIncomplete {
  status: "incomplete";
  shared_total: number;
  shared_judged: number;
}

export interface AgreementComplete {
  status: "complete";
  raw_agreement: number;
  kappa: number;
  disagreements: string[];
}

export type AgreementResponse = AgreementIncomplete | AgreementComplete;

export interface DisagreementEntry {
  record_id: string;
  verdicts: Record<string, { judgment: Judgment; note: string }>;
}

export interface DisagreementsResponse {
  disagreements: DisagreementEntry[];
}
