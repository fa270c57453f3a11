/**
 * Node bindings for the smirk SMILES tokenizer.
 *
 * Everything goes through the two supported integration surfaces: the
 * `smirk` command-line tool (encoding and decoding) and the vocabulary
 * JSON file format (vocabulary introspection).  No tokenization logic
 * lives on this side of the fence, so binding output is the CLI's
 * output by construction.
 */

import { execFileSync } from "node:child_process";
import { readFileSync } from "node:fs";

/** One encoded unit: surface form, vocabulary id, source span. */
export interface TokenEntry {
  token: string;
  id: number;
  /** Half-open [start, end) character offsets into the input string. */
  span: [number, number];
}

export interface VocabInfo {
  size: number;
  scheme: string;
  /** Special-role names mapped to their surface forms, e.g. UNK -> "[UNK]". */
  specials: Record<string, string>;
}

export interface TokenizerOptions {
  /** Tokenization scheme passed as --scheme (default: the CLI's default). */
  scheme?: string;
  /** Vocabulary file path or builtin name passed as --vocab. */
  vocabPath?: string;
  /**
   * Command used to launch the CLI, first element the executable.
   * Defaults to $SMIRK_CLI (whitespace-split) or ["smirk"].
   */
  cli?: string[];
}

interface EncodedLine {
  smiles: string;
  tokens: string[];
  ids: number[];
  offsets: [number, number][];
  unk_spans: [number, number][];
}

const MAX_BUFFER = 64 * 1024 * 1024;

function cliCommand(options: TokenizerOptions): string[] {
  if (options.cli && options.cli.length > 0) return options.cli;
  const fromEnv = process.env.SMIRK_CLI;
  if (fromEnv && fromEnv.trim() !== "") return fromEnv.trim().split(/\s+/);
  return ["smirk"];
}

function vocabFlags(options: TokenizerOptions): string[] {
  const flags: string[] = [];
  if (options.vocabPath) flags.push("--vocab", options.vocabPath);
  if (options.scheme) flags.push("--scheme", options.scheme);
  return flags;
}

function runCli(options: TokenizerOptions, args: string[], input: string): string {
  const [command, ...prefix] = cliCommand(options);
  try {
    return execFileSync(command, [...prefix, ...args], {
      input,
      encoding: "utf8",
      maxBuffer: MAX_BUFFER,
    });
  } catch (error) {
    const err = error as { status?: number; stderr?: string; message?: string };
    const detail = (err.stderr ?? err.message ?? "").trim();
    throw new Error(
      `smirk CLI failed (exit ${err.status ?? "?"}): ${detail}`,
    );
  }
}

/**
 * Encode a batch of molecules in one CLI call.  Output order matches
 * input order; an empty string encodes to an empty token list.
 */
export function encodeBatch(
  options: TokenizerOptions,
  molecules: string[],
): TokenEntry[][] {
  for (const mol of molecules) {
    if (/\s/.test(mol)) {
      throw new Error(`molecule contains whitespace: ${JSON.stringify(mol)}`);
    }
  }
  const nonEmpty = molecules.filter((mol) => mol !== "");
  let parsed: EncodedLine[] = [];
  if (nonEmpty.length > 0) {
    const stdout = runCli(
      options,
      ["tokenize", "--json", ...vocabFlags(options)],
      nonEmpty.join("\n") + "\n",
    );
    parsed = stdout
      .split("\n")
      .filter((line) => line !== "")
      .map((line) => JSON.parse(line) as EncodedLine);
    if (parsed.length !== nonEmpty.length) {
      throw new Error(
        `expected ${nonEmpty.length} encoded lines, got ${parsed.length}`,
      );
    }
  }
  let cursor = 0;
  return molecules.map((mol) => {
    if (mol === "") return [];
    const line = parsed[cursor++];
    return line.tokens.map((token, k) => ({
      token,
      id: line.ids[k],
      span: [line.offsets[k][0], line.offsets[k][1]] as [number, number],
    }));
  });
}

/** Encode one molecule to (token, id, span) entries. */
export function encode(
  options: TokenizerOptions,
  smiles: string,
): TokenEntry[] {
  return encodeBatch(options, [smiles])[0];
}

/** Decode batches of token ids back to strings, one CLI call. */
export function decodeBatch(
  options: TokenizerOptions,
  idLists: number[][],
): string[] {
  if (idLists.length === 0) return [];
  for (const ids of idLists) {
    for (const id of ids) {
      if (!Number.isInteger(id) || id < 0) {
        throw new Error(`token ids must be non-negative integers, got ${id}`);
      }
    }
  }
  const stdout = runCli(
    options,
    ["decode", ...vocabFlags(options)],
    idLists.map((ids) => ids.join(" ")).join("\n") + "\n",
  );
  const lines = stdout.split("\n");
  if (lines[lines.length - 1] === "") lines.pop();
  if (lines.length !== idLists.length) {
    throw new Error(`expected ${idLists.length} decoded lines, got ${lines.length}`);
  }
  return lines;
}

/** Decode one id sequence back to its string. */
export function decode(options: TokenizerOptions, ids: number[]): string {
  return decodeBatch(options, [ids])[0];
}

/** Read size, scheme, and specials straight from a vocabulary file. */
export function vocabInfo(vocabPath: string): VocabInfo {
  const doc = JSON.parse(readFileSync(vocabPath, "utf8")) as {
    version?: number;
    scheme?: string;
    tokens?: string[];
    specials?: Record<string, string>;
    merges?: [number, number][];
  };
  if (
    doc.version !== 1 ||
    typeof doc.scheme !== "string" ||
    !Array.isArray(doc.tokens) ||
    typeof doc.specials !== "object" ||
    doc.specials === null
  ) {
    throw new Error(`${vocabPath} is not a version-1 vocabulary file`);
  }
  // merged pairs mint ids after the base roster, so they count toward size
  return {
    size: doc.tokens.length + (doc.merges?.length ?? 0),
    scheme: doc.scheme,
    specials: { ...doc.specials },
  };
}
