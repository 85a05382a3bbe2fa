/**
 * Prediction export in the harness predictions format: JSON Lines, one
 * record per post with fields id, vfc_pos, vfc_neg, harm_pos, harm_neg.
 * Single-task checkpoints emit "NA" for the pair they do not score.
 */

import { writeFileSync } from "node:fs";
import { ClassifierHead, loadCheckpoint } from "./model.js";
import { PostRow, fold, readCollection } from "./tsv.js";

export function exportPredictions(
  checkpointDir: string,
  testPath: string,
  outPath: string,
  options: { split?: string; model?: string } = {},
): number {
  const model = loadCheckpoint(checkpointDir);
  let rows = readCollection(testPath);
  if (options.split) {
    rows = fold(rows, options.split);
  }
  if (rows.length === 0) {
    throw new Error(`${testPath}: no posts to export predictions for`);
  }
  const lines = rows.map((row) => recordFor(model, row, options.model));
  writeFileSync(outPath, lines.join("\n") + "\n");
  return rows.length;
}

function recordFor(model: ClassifierHead, row: PostRow, modelName?: string): string {
  const p = model.probabilities(row.text);
  let scores: Record<string, number | string>;
  if (model.config.kind === "multi-label") {
    scores = { vfc_pos: p[0], vfc_neg: p[1], harm_pos: p[2], harm_neg: p[3] };
  } else if (model.config.task === "vfc") {
    scores = { vfc_pos: p[0], vfc_neg: p[1], harm_pos: "NA", harm_neg: "NA" };
  } else {
    scores = { vfc_pos: "NA", vfc_neg: "NA", harm_pos: p[0], harm_neg: p[1] };
  }
  const record: Record<string, unknown> = { id: row.id, ...scores };
  if (modelName) record.model = modelName;
  return JSON.stringify(record);
}
