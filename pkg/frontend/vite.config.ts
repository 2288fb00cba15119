/// <reference types="vitest/config" />
import { defineConfig } from "vite";

export default defineConfig({
  build: {
    outDir: "dist",
  },
  test: {
    environment: "jsdom",
    globalSetup: ["tests/global_setup.ts"],
    testTimeout: 30_000,
    hookTimeout: 60_000,
  },
});
