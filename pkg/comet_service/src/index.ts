/**
 * Service bootstrap. Configuration comes from the environment:
 *
 *   COMET_ADDR   bind address, "host:port" (default 127.0.0.1:8300)
 *   COMET_MODEL  pinned checkpoint id echoed in every response
 *                (default lexical-qe-v1)
 */

import { createApp } from "./server.js";
import { loadCheckpoint } from "./scorer.js";

const DEFAULT_ADDR = "127.0.0.1:8300";
const DEFAULT_MODEL = "lexical-qe-v1";

function parseAddr(addr: string): { host: string; port: number } {
  const sep = addr.lastIndexOf(":");
  if (sep < 0) {
    return { host: "127.0.0.1", port: Number(addr) };
  }
  return { host: addr.slice(0, sep), port: Number(addr.slice(sep + 1)) };
}

const { host, port } = parseAddr(process.env.COMET_ADDR ?? DEFAULT_ADDR);
const modelId = process.env.COMET_MODEL ?? DEFAULT_MODEL;

if (!Number.isInteger(port) || port < 0 || port > 65535) {
  console.error(`invalid COMET_ADDR port: ${process.env.COMET_ADDR}`);
  process.exit(1);
}

const app = createApp(loadCheckpoint(modelId));
app.listen(port, host, () => {
  console.log(`scoring service on http://${host}:${port} (model ${modelId}, device cpu)`);
});
