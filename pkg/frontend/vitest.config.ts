import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    // unit suites opt into jsdom per file; the e2e suite stays on node
    // so it can spawn the real service and use the built-in fetch
    environment: "node",
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
