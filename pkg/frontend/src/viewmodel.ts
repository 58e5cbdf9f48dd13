/**
 * View state for one tracing session, derived solely from API payloads.
 *
 * No client-side math: every bits/count field is copied verbatim from the
 * service response. The only computation here is verification, i.e. parsing
 * the hex-float twin of each bits value and refusing payloads where the two
 * disagree, which guards against JSON round-trip loss.
 */

import type {
  RankingEntry,
  RecommendationsPayload,
  SessionPayload,
  SurvivorRow,
} from "./api.js";

export interface TimelineEntry {
  attribute: string;
  value: string;
  entropyAfter: number | null;
}

export interface WhatIfRow {
  value: string;
  count: number;
}

export interface RecommendationRow {
  attribute: string;
  bits: number;
  bitsHex: string;
  whatIf: WhatIfRow[];
}

export interface SessionViewModel {
  sessionId: string;
  datasetId: string;
  revision: number;
  status: string;
  candidateCount: number;
  /** Gauge value: always the latest entropy_history entry. */
  entropyBits: number | null;
  /** Gauge scale: the entropy before any observation. */
  initialEntropyBits: number | null;
  known: Record<string, string>;
  timeline: TimelineEntry[];
  chosen: string | null;
  recommendations: RecommendationRow[];
  survivors: SurvivorRow[] | null;
  identifiedObject: string | null;
}

/** Parse a hex float like "0x1.8000000000000p+1" exactly.
 *
 * The mantissa fits in 53 bits, so BigInt to Number is lossless, and the
 * power-of-two scale keeps the product exact.
 */
export function hexToNumber(hex: string): number {
  const m = /^(-?)0x([0-9a-fA-F]+)(?:\.([0-9a-fA-F]*))?p([+-]?\d+)$/.exec(hex.trim());
  if (!m) {
    throw new Error(`not a hex float: ${hex}`);
  }
  const sign = m[1] === "-" ? -1 : 1;
  const intPart = m[2];
  const fracPart = m[3] ?? "";
  const exponent = parseInt(m[4], 10);
  const mantissa = BigInt(`0x${intPart}${fracPart}`);
  const scale = exponent - 4 * fracPart.length;
  return sign * Number(mantissa) * Math.pow(2, scale);
}

/** Fixed display form for a bits value; null marks an empty candidate set. */
export function formatBits(bits: number | null): string {
  return bits === null ? "n/a" : bits.toFixed(3);
}

function checkHexTwin(bits: number | null, hex: string | null, context: string): void {
  if (bits === null || hex === null) {
    if (bits !== null || hex !== null) {
      throw new Error(`${context}: bits and hex must be null together`);
    }
    return;
  }
  const parsed = hexToNumber(hex);
  if (parsed !== bits) {
    throw new Error(`${context}: decimal ${bits} does not match hex ${hex} (${parsed})`);
  }
}

function toRecommendationRow(entry: RankingEntry): RecommendationRow {
  checkHexTwin(entry.bits, entry.bits_hex, `recommendation ${entry.attribute}`);
  const whatIf = Object.entries(entry.whatif).map(([value, count]) => ({ value, count }));
  return {
    attribute: entry.attribute,
    bits: entry.bits,
    bitsHex: entry.bits_hex,
    whatIf,
  };
}

export function buildViewModel(
  session: SessionPayload,
  recommendations: RecommendationsPayload | null,
): SessionViewModel {
  const history = session.entropy_history;
  if (history.length === 0) {
    throw new Error("session payload has an empty entropy history");
  }
  const latest = history[history.length - 1];
  if (latest !== session.entropy_bits) {
    throw new Error(
      `gauge would diverge: entropy_bits ${session.entropy_bits} vs history tail ${latest}`,
    );
  }
  checkHexTwin(session.entropy_bits, session.entropy_bits_hex, "session entropy");
  if (recommendations && recommendations.session_id !== session.session_id) {
    throw new Error("recommendations belong to a different session");
  }

  const timeline: TimelineEntry[] = session.path.map((step) => ({
    attribute: step.attribute,
    value: step.value,
    entropyAfter: step.entropy_after,
  }));

  return {
    sessionId: session.session_id,
    datasetId: session.dataset_id,
    revision: session.revision,
    status: session.status,
    candidateCount: session.candidate_count,
    entropyBits: session.entropy_bits,
    initialEntropyBits: history[0],
    known: { ...session.known },
    timeline,
    chosen: recommendations ? recommendations.chosen : null,
    recommendations: recommendations ? recommendations.ranking.map(toRecommendationRow) : [],
    survivors: session.survivors ? session.survivors.map((row) => ({ ...row })) : null,
    identifiedObject: session.identified_object ?? null,
  };
}

/** The view with session identity masked, for comparing rebuilt sessions. */
export function dashboardFingerprint(vm: SessionViewModel): string {
  const { sessionId, ...rest } = vm;
  void sessionId;
  return JSON.stringify(rest);
}
