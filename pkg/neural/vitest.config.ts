import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    testTimeout: 900_000,
    hookTimeout: 900_000,
    // model tests and game-playing tests share one process; keep them serial
    pool: "forks",
    poolOptions: { forks: { singleFork: true } },
  },
});
