/**
 * CLI: `finetune` trains on a split collection TSV, `export-predictions`
 * scores a test file with a saved checkpoint.
 *
 *   node dist/src/cli.js finetune --collection c3.tsv --out runs/c3 [--base-model encoder-base]
 *       [--lr 3e-5] [--batch-size 32] [--anneal-factor 0.5] [--patience 3]
 *       [--max-epochs N] [--chunk-size N] [--seed 0]
 *   node dist/src/cli.js export-predictions --checkpoint runs/c3/best --test test.tsv
 *       --out preds.jsonl [--split test] [--model-name name]
 */

import { exportPredictions } from "./export.js";
import { defaultConfig, finetune } from "./train.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      throw new Error(`malformed arguments near "${key}"`);
    }
    flags.set(key.slice(2), value);
  }
  return flags;
}

function need(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (value === undefined) throw new Error(`missing required flag --${name}`);
  return value;
}

function main(): number {
  const [command, ...rest] = process.argv.slice(2);
  try {
    if (command === "finetune") {
      const flags = parseFlags(rest);
      const config = defaultConfig(flags.get("base-model") ?? "encoder-base");
      if (flags.has("lr")) config.learningRate = Number(flags.get("lr"));
      if (flags.has("batch-size")) config.batchSize = Number(flags.get("batch-size"));
      if (flags.has("anneal-factor")) config.annealFactor = Number(flags.get("anneal-factor"));
      if (flags.has("patience")) config.patience = Number(flags.get("patience"));
      if (flags.has("max-epochs")) config.maxEpochs = Number(flags.get("max-epochs"));
      if (flags.has("chunk-size")) config.miniBatchChunkSize = Number(flags.get("chunk-size"));
      if (flags.has("seed")) config.seed = Number(flags.get("seed"));
      const result = finetune(need(flags, "collection"), need(flags, "out"), config);
      for (const entry of result.log) {
        console.log(JSON.stringify(entry));
      }
      console.log(`checkpoints written to ${result.checkpointDir}/{best,last}`);
      return 0;
    }
    if (command === "export-predictions") {
      const flags = parseFlags(rest);
      const count = exportPredictions(
        need(flags, "checkpoint"),
        need(flags, "test"),
        need(flags, "out"),
        { split: flags.get("split"), model: flags.get("model-name") },
      );
      console.log(`wrote ${count} prediction records to ${flags.get("out")}`);
      return 0;
    }
    console.error("usage: cli.js <finetune|export-predictions> [flags]");
    return 1;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }
}

process.exit(main());
