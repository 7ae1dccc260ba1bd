/** Loading of the engine's JSONL trajectory files and manifests. */

import * as fs from "node:fs";
import * as path from "node:path";
import { Manifest } from "./vocab.js";

export interface TrajectoryStep {
  s: string[];
  a: string[];
}

export interface Trajectory {
  x: string[];
  y: string[];
  steps: TrajectoryStep[];
  provenance: string;
}

export interface Sample {
  state: string[];
  action: string[];
}

export function loadManifest(dataDir: string): Manifest {
  const raw = fs.readFileSync(path.join(dataDir, "manifest.json"), "utf-8");
  return JSON.parse(raw) as Manifest;
}

export function loadTrajectories(file: string): Trajectory[] {
  return fs
    .readFileSync(file, "utf-8")
    .split("\n")
    .filter((line) => line.trim().length > 0)
    .map((line) => JSON.parse(line) as Trajectory);
}

/** Flatten trajectories into the (state, action) pairs the model fits. */
export function flattenToPairs(trajectories: Trajectory[]): Sample[] {
  const out: Sample[] = [];
  for (const traj of trajectories) {
    for (const step of traj.steps) {
      out.push({ state: step.s, action: step.a });
    }
  }
  return out;
}
