/**
 * HTTP layer. Wire contract:
 *
 *   GET  /health -> 200 {status, model_id, device} once the checkpoint is
 *                   loaded, 503 {status: "loading"} before that
 *   POST /score  -> {segments: number[0..1], system: mean, model_id}
 *                   400 malformed body or empty field, 413 over the batch
 *                   cap, 500 on inference failure
 *
 * Scoring is serialized through a single queue: the HTTP layer accepts
 * connections concurrently, but batches never interleave inside the model.
 */

import express, { type Express, type Request, type Response } from "express";
import { z } from "zod";
import type { Checkpoint } from "./scorer.js";

export const MAX_BATCH = 4096;
export const DEFAULT_BATCH_SIZE = 32;

const nonEmpty = z.string().refine((s) => s.trim().length > 0, "must be non-empty");

const scoreRequestSchema = z.object({
  pairs: z
    .array(z.object({ src: nonEmpty, mt: nonEmpty, ref: nonEmpty }))
    .min(1, "pairs must not be empty"),
  batch_size: z.number().int().positive().optional(),
});

export function createApp(checkpointLoading: Promise<Checkpoint>): Express {
  const app = express();
  app.use(express.json({ limit: "64mb" }));

  let checkpoint: Checkpoint | null = null;
  void checkpointLoading.then((loaded) => {
    checkpoint = loaded;
  });

  // single inference queue; one model instance, no cross-request interleaving
  let queue: Promise<unknown> = Promise.resolve();
  const enqueue = <T>(job: () => T): Promise<T> => {
    const next = queue.then(() => job());
    queue = next.catch(() => undefined);
    return next;
  };

  app.get("/health", (_req: Request, res: Response) => {
    if (checkpoint === null) {
      res.status(503).json({ status: "loading" });
      return;
    }
    res.status(200).json({
      status: "ok",
      model_id: checkpoint.modelId,
      device: checkpoint.device,
    });
  });

  app.post("/score", async (req: Request, res: Response) => {
    if (checkpoint === null) {
      res.status(503).json({ error: "checkpoint still loading" });
      return;
    }
    const model = checkpoint;
    if (Array.isArray(req.body?.pairs) && req.body.pairs.length > MAX_BATCH) {
      res.status(413).json({ error: `batch exceeds cap of ${MAX_BATCH}` });
      return;
    }
    const parsed = scoreRequestSchema.safeParse(req.body);
    if (!parsed.success) {
      res.status(400).json({ error: parsed.error.issues[0]?.message ?? "bad request" });
      return;
    }
    const { pairs, batch_size } = parsed.data;
    try {
      const segments = await enqueue(() =>
        model.scoreBatch(pairs, batch_size ?? DEFAULT_BATCH_SIZE),
      );
      const system = segments.reduce((acc, s) => acc + s, 0) / segments.length;
      res.status(200).json({ segments, system, model_id: model.modelId });
    } catch (err) {
      res.status(500).json({ error: err instanceof Error ? err.message : String(err) });
    }
  });

  app.use((_req: Request, res: Response) => {
    res.status(404).json({ error: "not found" });
  });

  // malformed JSON bodies land here via express.json
  app.use((err: Error, _req: Request, res: Response, _next: express.NextFunction) => {
    res.status(400).json({ error: err.message });
  });

  return app;
}
