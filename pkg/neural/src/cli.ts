/** Entry points: `train` fits a decoder on a trajectory file, `serve`
 * answers the engine's protocol from a checkpoint. */

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new Error(`unexpected argument ${arg}`);
    const value = i + 1 < argv.length && !argv[i + 1].startsWith("--") ? argv[++i] : "true";
    flags.set(arg.slice(2), value);
  }
  return flags;
}

async function trainCommand(argv: string[]): Promise<number> {
  const flags = parseFlags(argv);
  const need = (name: string): string => {
    const v = flags.get(name);
    if (!v) throw new Error(`--${name} is required`);
    return v;
  };
  const { loadManifest, loadTrajectories, flattenToPairs } = await import("./data.js");
  const { Model, configFromManifest } = await import("./model.js");
  const { PAPER_TRAIN, trainModel } = await import("./train.js");

  const dataDir = need("data");
  const manifest = loadManifest(dataDir);
  const samples = flattenToPairs(loadTrajectories(need("traj")));
  const decoder = (flags.get("decoder") ?? "d2") as import("./model.js").DecoderKind;
  const config = configFromManifest(manifest, decoder, {
    width: Number(flags.get("width") ?? 512),
    encoderLayers: Number(flags.get("layers") ?? (decoder === "linear" ? 6 : 4)),
    dropout: Number(flags.get("dropout") ?? 0.5),
  });
  const train = {
    ...PAPER_TRAIN,
    batchSize: Number(flags.get("batch") ?? PAPER_TRAIN.batchSize),
    learningRate: Number(flags.get("lr") ?? PAPER_TRAIN.learningRate),
    epochs: Number(flags.get("epochs") ?? PAPER_TRAIN.epochs),
    seed: Number(flags.get("seed") ?? 0),
    teacherForcing: Number(flags.get("tf-rate") ?? PAPER_TRAIN.teacherForcing),
    patience: Number(flags.get("patience") ?? PAPER_TRAIN.patience),
    restartEpochs: Number(flags.get("restart") ?? PAPER_TRAIN.restartEpochs),
    targetAccuracy: flags.has("target-acc") ? Number(flags.get("target-acc")) : undefined,
    validateData: flags.get("validate") ? dataDir : undefined,
    validateEvery: Number(flags.get("validate-every") ?? 0),
    validateSplit: flags.get("validate-split") ?? "valid",
  };

  let model = new Model(config, manifest, train.seed);
  const init = flags.get("init");
  if (init) {
    const fs = await import("node:fs");
    const path = await import("node:path");
    const { loadCheckpoint } = await import("./model.js");
    const ckpt = JSON.parse(fs.readFileSync(path.join(init, "weights.json"), "utf-8"));
    model = loadCheckpoint(ckpt);
  }
  console.error(
    `training ${decoder} (${model.parameterCount()} params) on ${samples.length} pairs`,
  );
  const result = await trainModel(model, samples, train, need("out"));
  console.error(
    `done: best loss ${result.bestLoss.toFixed(4)}, final train accuracy ${result.finalAccuracy.toFixed(3)}`,
  );
  return 0;
}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  const { initBackend } = await import("./backend.js");
  await initBackend();
  // nothing but protocol lines may reach stdout while serving
  if (command === "serve") {
    console.log = console.error;
    const { serveMain } = await import("./serve.js");
    if (rest.length !== 1) {
      console.error("usage: cli serve CHECKPOINT_DIR");
      return 1;
    }
    return serveMain(rest[0]);
  }
  if (command === "train") {
    return trainCommand(rest);
  }
  console.error("usage: cli train --data DIR --traj FILE --out DIR [flags] | cli serve CKPT");
  return 1;
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(err);
    process.exit(1);
  },
);
