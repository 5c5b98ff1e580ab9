import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    testTimeout: 30000,
    hookTimeout: 60000,
    // DOM tests opt into jsdom per-file via @vitest-environment docblocks.
    environment: "node",
  },
});
