import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // Integration tests spawn the Python session server.
    testTimeout: 60_000,
    hookTimeout: 60_000,
    pool: "forks",
  },
});
