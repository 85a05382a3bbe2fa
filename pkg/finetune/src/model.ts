/**
 * Classifier head over hashed features.
 *
 * Two output layouts, mirroring the harness label space:
 *  - "multi-label": four independent sigmoid outputs
 *    (vfc_pos, vfc_neg, harm_pos, harm_neg), binary cross-entropy loss.
 *  - "single-task": two softmax outputs (pos, neg) for one task,
 *    cross-entropy loss.
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { DEFAULT_HASHING, HashingConfig, SparseVec, featurize } from "./features.js";

export type HeadKind = "multi-label" | "single-task";
export type Task = "vfc" | "harmful";

export const MULTI_LABELS = ["vfc_pos", "vfc_neg", "harm_pos", "harm_neg"] as const;

export interface ModelConfig {
  kind: HeadKind;
  task: Task | null; // set for single-task heads
  hashing: HashingConfig;
  baseModel: string;
}

export class ClassifierHead {
  readonly outputs: number;
  weights: Float64Array; // hashDim x outputs, row-major
  bias: Float64Array;

  constructor(readonly config: ModelConfig) {
    this.outputs = config.kind === "multi-label" ? 4 : 2;
    this.weights = new Float64Array(config.hashing.hashDim * this.outputs);
    this.bias = new Float64Array(this.outputs);
  }

  logits(features: SparseVec): Float64Array {
    const z = Float64Array.from(this.bias);
    const k = this.outputs;
    for (let i = 0; i < features.indices.length; i++) {
      const row = features.indices[i] * k;
      const v = features.values[i];
      for (let j = 0; j < k; j++) {
        z[j] += v * this.weights[row + j];
      }
    }
    return z;
  }

  /** Per-output probabilities: sigmoid per label, or softmax for single-task. */
  probabilities(text: string): Float64Array {
    const z = this.logits(featurize(text, this.config.hashing));
    const out = new Float64Array(this.outputs);
    if (this.config.kind === "multi-label") {
      for (let j = 0; j < this.outputs; j++) {
        out[j] = 1 / (1 + Math.exp(-z[j]));
      }
    } else {
      const m = Math.max(...z);
      let sum = 0;
      for (let j = 0; j < this.outputs; j++) {
        out[j] = Math.exp(z[j] - m);
        sum += out[j];
      }
      for (let j = 0; j < this.outputs; j++) out[j] /= sum;
    }
    return out;
  }

  snapshot(): ClassifierHead {
    const copy = new ClassifierHead(this.config);
    copy.weights = Float64Array.from(this.weights);
    copy.bias = Float64Array.from(this.bias);
    return copy;
  }
}

const CHECKPOINT_VERSION = 1;

export function saveCheckpoint(model: ClassifierHead, dir: string): void {
  mkdirSync(dir, { recursive: true });
  const payload = {
    format: "finetune-checkpoint",
    version: CHECKPOINT_VERSION,
    kind: model.config.kind,
    task: model.config.task,
    base_model: model.config.baseModel,
    hashing: model.config.hashing,
    outputs: model.outputs,
    weights: Array.from(model.weights),
    bias: Array.from(model.bias),
  };
  writeFileSync(join(dir, "model.json"), JSON.stringify(payload));
}

export function loadCheckpoint(dir: string): ClassifierHead {
  const raw = JSON.parse(readFileSync(join(dir, "model.json"), "utf-8"));
  if (raw.format !== "finetune-checkpoint") {
    throw new Error(`${dir}: not a finetune checkpoint`);
  }
  if (raw.version !== CHECKPOINT_VERSION) {
    throw new Error(
      `${dir}: unsupported checkpoint version ${raw.version} (this build reads ${CHECKPOINT_VERSION})`,
    );
  }
  const model = new ClassifierHead({
    kind: raw.kind,
    task: raw.task,
    hashing: raw.hashing ?? DEFAULT_HASHING,
    baseModel: raw.base_model ?? "unknown",
  });
  model.weights = Float64Array.from(raw.weights);
  model.bias = Float64Array.from(raw.bias);
  if (model.weights.length !== model.config.hashing.hashDim * model.outputs) {
    throw new Error(`${dir}: weight matrix has the wrong size`);
  }
  return model;
}
