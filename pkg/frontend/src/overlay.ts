/** Prediction-overlay helpers: agreement between model and human labels. */

import type { PredictionItem } from "./api.js";

export interface AgreementStats {
  covered: number;
  labeled: number;
  agree: number;
  agreement: number | null;
}

/** Fraction of covered, human-labeled steps where the model's pick matches.
 * Computed client-side from the raw items so the footer can be checked
 * against the server's evaluation-pipeline accuracy. */
export function agreementStats(items: PredictionItem[]): AgreementStats {
  let labeled = 0;
  let agree = 0;
  for (const item of items) {
    if (item.human === null) continue;
    labeled += 1;
    if (item.predicted === item.human) agree += 1;
  }
  return {
    covered: items.length,
    labeled,
    agree,
    agreement: labeled > 0 ? agree / labeled : null,
  };
}

export function formatAgreement(stats: AgreementStats): string {
  if (stats.agreement === null) return "Agreement: n/a (no labeled frames covered)";
  const pct = (100 * stats.agreement).toFixed(1);
  return `Agreement: ${pct}% (${stats.agree}/${stats.labeled} labeled steps)`;
}

/** Predicted camera per timestamp for tile highlighting. */
export function predictionByTimestamp(items: PredictionItem[]): Map<number, number> {
  const map = new Map<number, number>();
  for (const item of items) map.set(item.timestamp, item.predicted);
  return map;
}
