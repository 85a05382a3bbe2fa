/**
 * Reader for the harness collection TSV format.
 *
 * Header row: id, text, language, vfc_label, harmful_label[, split].
 * Embedded tabs/newlines/carriage returns/backslashes in the text column are
 * escaped as \t, \n, \r, \\. Label cells are "0", "1", or empty (absent).
 */

import { readFileSync } from "node:fs";

export interface PostRow {
  id: string;
  text: string;
  language: string;
  vfc: 0 | 1 | null;
  harmful: 0 | 1 | null;
  split: string | null;
}

function unescapeField(value: string, where: string): string {
  let out = "";
  for (let i = 0; i < value.length; i++) {
    const ch = value[i];
    if (ch !== "\\") {
      out += ch;
      continue;
    }
    const next = value[i + 1];
    if (next === undefined) {
      throw new Error(`${where}: dangling backslash escape`);
    }
    switch (next) {
      case "\\": out += "\\"; break;
      case "t": out += "\t"; break;
      case "n": out += "\n"; break;
      case "r": out += "\r"; break;
      default:
        throw new Error(`${where}: unknown escape sequence \\${next}`);
    }
    i++;
  }
  return out;
}

function parseLabel(raw: string, where: string): 0 | 1 | null {
  if (raw === "") return null;
  if (raw === "0") return 0;
  if (raw === "1") return 1;
  throw new Error(`${where}: label must be 0, 1, or empty, got "${raw}"`);
}

export function readCollection(path: string): PostRow[] {
  const content = readFileSync(path, "utf-8");
  const lines = content.split("\n");
  if (lines[lines.length - 1] === "") lines.pop();
  if (lines.length === 0) throw new Error(`${path}: empty file`);

  const header = lines[0].split("\t");
  const col = (name: string): number => header.indexOf(name);
  for (const required of ["id", "text", "language"]) {
    if (col(required) < 0) throw new Error(`${path}: missing required column "${required}"`);
  }
  const idIdx = col("id");
  const textIdx = col("text");
  const langIdx = col("language");
  const vfcIdx = col("vfc_label");
  const harmIdx = col("harmful_label");
  const splitIdx = col("split");

  const rows: PostRow[] = [];
  const seen = new Set<string>();
  for (let lineno = 2; lineno <= lines.length; lineno++) {
    const fields = lines[lineno - 2 + 1].split("\t");
    const where = `${path}:${lineno}`;
    if (fields.length !== header.length) {
      throw new Error(`${where}: expected ${header.length} fields, got ${fields.length}`);
    }
    const id = fields[idIdx];
    if (id === "") throw new Error(`${where}: empty id`);
    if (seen.has(id)) throw new Error(`${where}: duplicate id "${id}"`);
    seen.add(id);
    rows.push({
      id,
      text: unescapeField(fields[textIdx], where),
      language: fields[langIdx],
      vfc: vfcIdx >= 0 ? parseLabel(fields[vfcIdx], where) : null,
      harmful: harmIdx >= 0 ? parseLabel(fields[harmIdx], where) : null,
      split: splitIdx >= 0 ? fields[splitIdx] : null,
    });
  }
  return rows;
}

export function fold(rows: PostRow[], name: string): PostRow[] {
  return rows.filter((r) => r.split === name);
}
