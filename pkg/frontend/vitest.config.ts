import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    // the fixture campaign shells out to the simulator once
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
