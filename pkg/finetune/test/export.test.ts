import assert from "node:assert/strict";
import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import test from "node:test";
import { exportPredictions } from "../src/export.js";
import { defaultConfig, finetune } from "../src/train.js";
import { writeFixtureCollection } from "./fixtures.js";

function fixtureRun(singleTask = false): { dir: string; collection: string } {
  const dir = mkdtempSync(join(tmpdir(), "ft-export-"));
  const collection = join(dir, "c.tsv");
  writeFixtureCollection(collection, { singleTask });
  finetune(collection, join(dir, "run"), defaultConfig());
  return { dir, collection };
}

function pythonAvailable(): boolean {
  try {
    execFileSync("python3", ["-c", "import claimcheck"], { stdio: "pipe" });
    return true;
  } catch {
    return false;
  }
}

test("exports one record per test post with four score fields", () => {
  const { dir, collection } = fixtureRun();
  const out = join(dir, "preds.jsonl");
  const count = exportPredictions(join(dir, "run", "best"), collection, out, { split: "test" });
  assert.equal(count, 30);
  const lines = readFileSync(out, "utf-8").trim().split("\n");
  assert.equal(lines.length, 30);
  for (const line of lines) {
    const record = JSON.parse(line);
    for (const key of ["vfc_pos", "vfc_neg", "harm_pos", "harm_neg"]) {
      const value = record[key];
      assert.ok(typeof value === "number" && value >= 0 && value <= 1, `${key}=${value}`);
    }
  }
});

test("single-task checkpoints emit NA for the unscored pair", () => {
  const { dir, collection } = fixtureRun(true);
  const out = join(dir, "preds.jsonl");
  exportPredictions(join(dir, "run", "best"), collection, out, { split: "test" });
  for (const line of readFileSync(out, "utf-8").trim().split("\n")) {
    const record = JSON.parse(line);
    assert.equal(record.harm_pos, "NA");
    assert.equal(record.harm_neg, "NA");
    assert.ok(typeof record.vfc_pos === "number");
  }
});

test("empty test selection is an error", () => {
  const { dir, collection } = fixtureRun();
  assert.throws(
    () => exportPredictions(join(dir, "run", "best"), collection, join(dir, "p.jsonl"), {
      split: "nonexistent",
    }),
    /no posts/,
  );
});

test("format bridge: the harness parses exported predictions cleanly", (t) => {
  if (!pythonAvailable()) {
    t.skip("python harness not installed");
    return;
  }
  const { dir, collection } = fixtureRun();
  const out = join(dir, "preds.jsonl");
  exportPredictions(join(dir, "run", "best"), collection, out, {
    split: "test",
    model: "finetune-best",
  });
  const script = [
    "import sys, warnings",
    "from claimcheck.classifier import load_predictions",
    "with warnings.catch_warnings():",
    "    warnings.simplefilter('error')",
    `    preds = load_predictions(${JSON.stringify(out)})`,
    "print(len(preds), preds.provenance)",
  ].join("\n");
  const stdout = execFileSync("python3", ["-c", script], { encoding: "utf-8" });
  assert.equal(stdout.trim(), "30 finetune-best");
});

test("format bridge: the harness evaluates exported predictions end to end", (t) => {
  if (!pythonAvailable()) {
    t.skip("python harness not installed");
    return;
  }
  const { dir, collection } = fixtureRun();
  const out = join(dir, "preds.jsonl");
  exportPredictions(join(dir, "run", "best"), collection, out, { split: "test" });
  const script = [
    "from claimcheck.classifier import load_predictions",
    "from claimcheck.corpus import load_collection",
    "from claimcheck.evaluation import evaluate",
    `gold = load_collection(${JSON.stringify(collection)}).fold('test')`,
    `report = evaluate(load_predictions(${JSON.stringify(out)}), gold, 'vfc')`,
    "print(report.n)",
  ].join("\n");
  const stdout = execFileSync("python3", ["-c", script], { encoding: "utf-8" });
  assert.equal(stdout.trim(), "30");
});
