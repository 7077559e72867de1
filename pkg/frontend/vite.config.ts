import { defineConfig } from "vite";

export default defineConfig({
  base: "/ui/",
  build: { outDir: "dist" },
  server: {
    proxy: {
      "/objects": "http://127.0.0.1:8337",
      "/object": "http://127.0.0.1:8337",
      "/evaluate": "http://127.0.0.1:8337",
      "/health": "http://127.0.0.1:8337",
    },
  },
});
