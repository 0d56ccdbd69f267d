/**
 * Scripted end-to-end console loop against a live service.
 *
 *   tagrec serve --model encoder.bin --catalog catalog.npz &
 *   npm run console-loop            # or BASE_URL=http://host:port npm run console-loop
 */
import { ApiClient } from "../src/api.js";
import { runConsoleLoop } from "../src/consoleLoop.js";

const baseUrl = process.env["BASE_URL"] ?? "http://127.0.0.1:8000";

runConsoleLoop(new ApiClient(baseUrl))
  .then((results) => {
    for (const r of results) {
      console.log(`[${r.ok ? "PASS" : "FAIL"}] ${r.step} (${r.detail})`);
    }
    console.log("console loop completed");
  })
  .catch((err) => {
    console.error(String(err));
    process.exit(1);
  });
