/** Line-protocol game server: answer the engine's act queries with the
 * checkpointed model's greedy actions. One JSON object per line on
 * stdin/stdout; everything diagnostic goes to stderr. */

import * as fs from "node:fs";
import * as path from "node:path";
import * as readline from "node:readline";
import { Checkpoint, Model, loadCheckpoint } from "./model.js";

function manifestMismatch(model: Model, hello: Record<string, unknown>): string | null {
  const manifest = hello.manifest as Record<string, unknown> | undefined;
  if (!manifest) return null;
  const mine = model.manifest as unknown as Record<string, unknown>;
  for (const key of ["task", "action_length"]) {
    if (key in manifest && JSON.stringify(manifest[key]) !== JSON.stringify(mine[key])) {
      return `${key} mismatch: engine ${JSON.stringify(manifest[key])} vs checkpoint ${JSON.stringify(mine[key])}`;
    }
  }
  for (const key of ["state_vocab", "action_vocab"]) {
    const theirs = manifest[key] as string[] | undefined;
    if (theirs && JSON.stringify(theirs) !== JSON.stringify(mine[key])) {
      return `${key} mismatch between engine data and checkpoint`;
    }
  }
  return null;
}

export async function serveMain(ckptDir: string): Promise<number> {
  const raw = fs.readFileSync(path.join(ckptDir, "weights.json"), "utf-8");
  const model = loadCheckpoint(JSON.parse(raw) as Checkpoint);
  // warm up so the first act query does not pay one-off kernel setup
  model.predict([]);

  const out = (obj: unknown) => process.stdout.write(JSON.stringify(obj) + "\n");
  const rl = readline.createInterface({ input: process.stdin, terminal: false });
  for await (const line of rl) {
    if (!line.trim()) continue;
    let msg: Record<string, unknown>;
    try {
      msg = JSON.parse(line);
    } catch (e) {
      out({ ok: false, error: `bad request line: ${e}` });
      continue;
    }
    const kind = msg.type;
    if (kind === "hello") {
      const mismatch = manifestMismatch(model, msg);
      out(mismatch ? { ok: false, error: mismatch } : { ok: true });
    } else if (kind === "reset") {
      out({ ok: true });
    } else if (kind === "act") {
      out({ action: model.predict(msg.state as string[]) });
    } else if (kind === "shutdown") {
      return 0;
    } else {
      out({ ok: false, error: `unknown request type ${JSON.stringify(kind)}` });
    }
  }
  return 0;
}
