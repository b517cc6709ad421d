import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // Every binding call spawns the CLI (~0.2-0.3 s each), so suites that
    // exercise many fixtures need far more headroom than the default 5 s.
    testTimeout: 180_000,
    hookTimeout: 60_000,
  },
});
