/**
 * Training loop with best/last checkpointing and plateau annealing.
 *
 * Hyperparameter defaults follow the shared training protocol: learning rate
 * 3e-05, batch size 32, anneal factor 0.5, patience 3; epoch budget by model
 * variant (5 base, 10 large, 15 distilled); gradient accumulation chunk of 1
 * for large variants. No accelerator back end exists in this runtime, so
 * training always runs on CPU and says so.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { DEFAULT_HASHING, SparseVec, featurize } from "./features.js";
import { ClassifierHead, HeadKind, ModelConfig, Task, saveCheckpoint } from "./model.js";
import { Mulberry32 } from "./rng.js";
import { PlateauScheduler } from "./scheduler.js";
import { PostRow, fold, readCollection } from "./tsv.js";

export interface FinetuneConfig {
  baseModel: string;
  learningRate: number;
  batchSize: number;
  annealFactor: number;
  patience: number;
  maxEpochs: number;
  miniBatchChunkSize: number;
  seed: number;
}

export function epochsForVariant(baseModel: string): number {
  const name = baseModel.toLowerCase();
  if (name.includes("distil")) return 15;
  if (name.includes("large")) return 10;
  return 5;
}

export function defaultConfig(baseModel = "encoder-base"): FinetuneConfig {
  return {
    baseModel,
    learningRate: 3e-5,
    batchSize: 32,
    annealFactor: 0.5,
    patience: 3,
    maxEpochs: epochsForVariant(baseModel),
    miniBatchChunkSize: baseModel.toLowerCase().includes("large") ? 1 : 32,
    seed: 0,
  };
}

export interface EpochLogEntry {
  epoch: number;
  learning_rate: number;
  train_loss: number;
  val_accuracy: number;
  improved: boolean;
  annealed: boolean;
}

export interface FinetuneResult {
  checkpointDir: string;
  log: EpochLogEntry[];
  kind: HeadKind;
  task: Task | null;
}

interface Example {
  features: SparseVec;
  targets: Float64Array; // one slot per output
  mask: Float64Array;
}

function detectHead(rows: PostRow[]): { kind: HeadKind; task: Task | null } {
  const hasVfc = rows.some((r) => r.vfc !== null);
  const hasHarm = rows.some((r) => r.harmful !== null);
  if (hasVfc && hasHarm) return { kind: "multi-label", task: null };
  if (hasVfc) return { kind: "single-task", task: "vfc" };
  if (hasHarm) return { kind: "single-task", task: "harmful" };
  throw new Error("no task labels anywhere in the training fold");
}

function buildExamples(rows: PostRow[], config: ModelConfig): Example[] {
  const outputs = config.kind === "multi-label" ? 4 : 2;
  return rows.map((row) => {
    const targets = new Float64Array(outputs);
    const mask = new Float64Array(outputs);
    if (config.kind === "multi-label") {
      if (row.vfc !== null) {
        targets[0] = row.vfc;
        targets[1] = 1 - row.vfc;
        mask[0] = mask[1] = 1;
      }
      if (row.harmful !== null) {
        targets[2] = row.harmful;
        targets[3] = 1 - row.harmful;
        mask[2] = mask[3] = 1;
      }
    } else {
      const label = config.task === "vfc" ? row.vfc : row.harmful;
      if (label !== null) {
        targets[0] = label;
        targets[1] = 1 - label;
        mask[0] = mask[1] = 1;
      }
    }
    return { features: featurize(row.text, config.hashing), targets, mask };
  });
}

/** Loss and per-output dL/dz for one example (writes dz in place). */
function lossAndDz(model: ClassifierHead, ex: Example, dz: Float64Array): number {
  const z = model.logits(ex.features);
  let loss = 0;
  if (model.config.kind === "multi-label") {
    for (let j = 0; j < z.length; j++) {
      if (ex.mask[j] === 0) {
        dz[j] = 0;
        continue;
      }
      const p = 1 / (1 + Math.exp(-z[j]));
      // softplus keeps the loss finite at extreme logits
      loss += Math.log1p(Math.exp(-Math.abs(z[j]))) + Math.max(z[j], 0) - ex.targets[j] * z[j];
      dz[j] = p - ex.targets[j];
    }
  } else {
    if (ex.mask[0] === 0) {
      dz.fill(0);
      return 0;
    }
    const m = Math.max(z[0], z[1]);
    const e0 = Math.exp(z[0] - m);
    const e1 = Math.exp(z[1] - m);
    const sum = e0 + e1;
    const p0 = e0 / sum;
    const gold = ex.targets[0] === 1 ? 0 : 1;
    loss = -Math.log(gold === 0 ? p0 : 1 - p0);
    dz[0] = p0 - ex.targets[0];
    dz[1] = 1 - p0 - ex.targets[1];
  }
  return loss;
}

function accuracy(model: ClassifierHead, examples: Example[]): number {
  let correct = 0;
  let total = 0;
  for (const ex of examples) {
    const z = model.logits(ex.features);
    const pairs = model.config.kind === "multi-label" ? [0, 2] : [0];
    for (const lo of pairs) {
      if (ex.mask[lo] === 0) continue;
      const predicted = z[lo] >= z[lo + 1] ? 1 : 0;
      total += 1;
      if (predicted === ex.targets[lo]) correct += 1;
    }
  }
  return total === 0 ? 0 : correct / total;
}

export function finetune(
  collectionPath: string,
  outDir: string,
  config: FinetuneConfig,
): FinetuneResult {
  if (config.maxEpochs < 1) throw new Error("maxEpochs must be at least 1");
  if (config.learningRate <= 0) throw new Error("learningRate must be positive");

  const rows = readCollection(collectionPath);
  const trainRows = fold(rows, "train");
  const valRows = fold(rows, "val");
  if (trainRows.length === 0) {
    throw new Error(`${collectionPath}: no train fold (missing split column?)`);
  }
  if (valRows.length === 0) {
    throw new Error(`${collectionPath}: no val fold (missing split column?)`);
  }

  console.warn("accelerator unavailable in this runtime, training on CPU");

  const head = detectHead(trainRows);
  const modelConfig: ModelConfig = {
    kind: head.kind,
    task: head.task,
    hashing: DEFAULT_HASHING,
    baseModel: config.baseModel,
  };
  const model = new ClassifierHead(modelConfig);
  const trainExamples = buildExamples(trainRows, modelConfig);
  const valExamples = buildExamples(valRows, modelConfig);

  const scheduler = new PlateauScheduler(config.learningRate, config.annealFactor, config.patience);
  const rng = new Mulberry32(config.seed);
  const log: EpochLogEntry[] = [];
  const k = model.outputs;
  const dz = new Float64Array(k);
  let best = model.snapshot();
  let bestMetric = -Infinity;

  for (let epoch = 1; epoch <= config.maxEpochs; epoch++) {
    const lr = scheduler.learningRate;
    const order = trainExamples.map((_, i) => i);
    rng.shuffle(order);
    let epochLoss = 0;
    for (let start = 0; start < order.length; start += config.batchSize) {
      const batch = order.slice(start, start + config.batchSize);
      // accumulate over the batch in chunks (miniBatchChunkSize), then apply
      const grads = new Map<number, Float64Array>();
      const db = new Float64Array(k);
      const chunk = Math.max(1, config.miniBatchChunkSize);
      for (let c = 0; c < batch.length; c += chunk) {
        for (const i of batch.slice(c, c + chunk)) {
          const ex = trainExamples[i];
          epochLoss += lossAndDz(model, ex, dz);
          for (let f = 0; f < ex.features.indices.length; f++) {
            const row = ex.features.indices[f];
            const v = ex.features.values[f];
            let g = grads.get(row);
            if (!g) {
              g = new Float64Array(k);
              grads.set(row, g);
            }
            for (let j = 0; j < k; j++) g[j] += v * dz[j];
          }
          for (let j = 0; j < k; j++) db[j] += dz[j];
        }
      }
      const scale = lr / batch.length;
      for (const [row, g] of grads) {
        const base = row * k;
        for (let j = 0; j < k; j++) model.weights[base + j] -= scale * g[j];
      }
      for (let j = 0; j < k; j++) model.bias[j] -= scale * db[j];
    }

    const metric = accuracy(model, valExamples);
    const improved = metric > bestMetric;
    if (improved) {
      bestMetric = metric;
      best = model.snapshot();
    }
    const annealed = scheduler.step(metric);
    log.push({
      epoch,
      learning_rate: lr,
      train_loss: epochLoss / trainExamples.length,
      val_accuracy: metric,
      improved,
      annealed,
    });
  }

  mkdirSync(outDir, { recursive: true });
  saveCheckpoint(best, join(outDir, "best"));
  saveCheckpoint(model, join(outDir, "last"));
  writeFileSync(
    join(outDir, "training_log.jsonl"),
    log.map((e) => JSON.stringify(e)).join("\n") + "\n",
  );
  writeFileSync(
    join(outDir, "run.json"),
    JSON.stringify(
      {
        collection: collectionPath,
        config,
        head: head.kind,
        task: head.task,
        device: "cpu",
        best_val_accuracy: bestMetric,
      },
      null,
      2,
    ) + "\n",
  );
  return { checkpointDir: outDir, log, kind: head.kind, task: head.task };
}
