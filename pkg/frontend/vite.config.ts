/// <reference types="vitest" />
import { defineConfig } from "vite";

// The UI only ever talks to the bias-report service; in dev the /v1 calls
// are proxied to a locally running `fairlab serve`.
export default defineConfig({
  server: {
    proxy: {
      "/v1": "http://127.0.0.1:8000",
    },
  },
  test: {
    environment: "jsdom",
  },
});
