import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    testTimeout: 30000,
    hookTimeout: 60000,
    // The integration suite spawns one shared backend; keep files sequential.
    fileParallelism: false,
  },
});
