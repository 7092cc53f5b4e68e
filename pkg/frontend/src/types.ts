/** Payload shapes of the curation service API, plus client-side validation
 * of outgoing decisions so a malformed POST never leaves the browser. */

export interface ApiCandidate {
  cui: string;
  preferred_label: string;
  score: number;
  match_kind: "exact" | "partial";
  is_preferred: boolean;
}

export type RowStatus = "unresolved" | "accepted" | "rejected";

export interface ApiRow {
  class_iri: string;
  label: string;
  context: string[];
  candidates: ApiCandidate[];
  ambiguous: boolean;
  status: RowStatus;
  resolution: Record<string, unknown> | null;
}

export interface Progress {
  unresolved: number;
  accepted: number;
  rejected: number;
  total: number;
}

export interface TerminologyPreview {
  name: string;
  entries: Array<{ cui: string; preferred_label: string }>;
}

export interface Decision {
  class_iri: string;
  verdict: "accept" | "reject";
  chosen_cui?: string;
  curator: string;
  note?: string;
}

const CUI_PATTERN = /^C\d{7}$/;

/** Returns a list of schema violations; empty means the decision may be sent. */
export function validateDecision(decision: Decision): string[] {
  const problems: string[] = [];
  if (!decision.class_iri) {
    problems.push("class_iri is required");
  }
  if (decision.verdict !== "accept" && decision.verdict !== "reject") {
    problems.push(`verdict must be accept or reject, got "${decision.verdict}"`);
  }
  if (decision.verdict === "accept") {
    if (!decision.chosen_cui) {
      problems.push("accept needs a chosen_cui");
    } else if (!CUI_PATTERN.test(decision.chosen_cui)) {
      problems.push(`chosen_cui "${decision.chosen_cui}" is not a C####### identifier`);
    }
  }
  if (decision.verdict === "reject" && decision.chosen_cui) {
    problems.push("reject must not carry a chosen_cui");
  }
  if (!decision.curator) {
    problems.push("curator is required");
  }
  return problems;
}
