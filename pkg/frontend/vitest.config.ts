import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    // the contract suite boots the real analysis service
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
