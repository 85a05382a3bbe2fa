/** Deterministic 200-post fixture in the harness collection TSV format. */

import { writeFileSync } from "node:fs";
import { Mulberry32 } from "../src/rng.js";

const VFC_POS = ["statistics", "confirmed", "measured", "report", "percent", "figures"];
const VFC_NEG = ["lovely", "weather", "mood", "vibes", "celebrate", "sunshine"];
const HARM_POS = ["disgusting", "idiots", "destroy", "filth", "scum"];
const HARM_NEG = ["community", "support", "kindness", "respect", "peace"];
const LANGS = ["en", "nl", "tr", "ar", "bg"];

function esc(text: string): string {
  return text
    .replaceAll("\\", "\\\\")
    .replaceAll("\t", "\\t")
    .replaceAll("\n", "\\n")
    .replaceAll("\r", "\\r");
}

export function writeFixtureCollection(
  path: string,
  options: { posts?: number; singleTask?: boolean } = {},
): void {
  const total = options.posts ?? 200;
  const rng = new Mulberry32(99);
  const lines = ["id\ttext\tlanguage\tvfc_label\tharmful_label\tsplit"];
  for (let i = 0; i < total; i++) {
    const vfc = i % 2;
    const harm = Math.floor(i / 2) % 2;
    const words: string[] = [];
    const vfcPool = vfc ? VFC_POS : VFC_NEG;
    const harmPool = harm ? HARM_POS : HARM_NEG;
    for (let w = 0; w < 4 + rng.below(3); w++) words.push(vfcPool[rng.below(vfcPool.length)]);
    for (let w = 0; w < 3 + rng.below(2); w++) words.push(harmPool[rng.below(harmPool.length)]);
    rng.shuffle(words);
    const split = i < 140 ? "train" : i < 170 ? "val" : "test";
    const harmCell = options.singleTask ? "" : String(harm);
    lines.push(
      `ft-${String(i).padStart(3, "0")}\t${esc(words.join(" "))}\t${LANGS[i % LANGS.length]}\t${vfc}\t${harmCell}\t${split}`,
    );
  }
  writeFileSync(path, lines.join("\n") + "\n");
}
