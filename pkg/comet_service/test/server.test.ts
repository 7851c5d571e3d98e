import { afterEach, describe, expect, it } from "vitest";
import type { Server } from "node:http";

import { createApp, MAX_BATCH } from "../src/server.js";
import { loadCheckpoint, scoreTriple, type Checkpoint } from "../src/scorer.js";

const servers: Server[] = [];

function listen(checkpointLoading: Promise<Checkpoint>): Promise<string> {
  const app = createApp(checkpointLoading);
  return new Promise((resolve) => {
    const server = app.listen(0, "127.0.0.1", () => {
      const addr = server.address();
      if (addr === null || typeof addr === "string") throw new Error("no port");
      resolve(`http://127.0.0.1:${addr.port}`);
    });
    servers.push(server);
  });
}

afterEach(() => {
  for (const server of servers.splice(0)) {
    server.close();
  }
});

const triple = (i: number) => ({
  src: `sentence source number ${i}`,
  mt: `machine translation output ${i}`,
  ref: `reference translation text ${i}`,
});

async function postScore(base: string, body: unknown): Promise<globalThis.Response> {
  return fetch(`${base}/score`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: typeof body === "string" ? body : JSON.stringify(body),
  });
}

describe("GET /health", () => {
  it("transitions 503 -> 200 as the checkpoint loads", async () => {
    let release!: (c: Checkpoint) => void;
    const gate = new Promise<Checkpoint>((resolve) => {
      release = resolve;
    });
    const base = await listen(gate);

    const before = await fetch(`${base}/health`);
    expect(before.status).toBe(503);
    expect((await before.json()).status).toBe("loading");

    release(await loadCheckpoint("pinned-ckpt"));
    await new Promise((r) => setTimeout(r, 10));

    const after = await fetch(`${base}/health`);
    expect(after.status).toBe(200);
    const payload = await after.json();
    expect(payload).toEqual({ status: "ok", model_id: "pinned-ckpt", device: "cpu" });
  });

  it("unknown routes answer 404", async () => {
    const base = await listen(loadCheckpoint("m"));
    await new Promise((r) => setTimeout(r, 10));
    expect((await fetch(`${base}/nope`)).status).toBe(404);
  });
});

describe("POST /score", () => {
  it("preserves order and length; system is the exact mean", async () => {
    const base = await listen(loadCheckpoint("m"));
    await new Promise((r) => setTimeout(r, 10));
    const pairs = Array.from({ length: 50 }, (_, i) => triple(i));
    const res = await postScore(base, { pairs });
    expect(res.status).toBe(200);
    const payload = await res.json();
    expect(payload.model_id).toBe("m");
    expect(payload.segments).toHaveLength(50);
    expect(payload.segments).toEqual(pairs.map(scoreTriple));
    const mean = payload.segments.reduce((a: number, b: number) => a + b, 0) / 50;
    expect(Math.abs(payload.system - mean)).toBeLessThanOrEqual(1e-9);
    for (const s of payload.segments) {
      expect(s).toBeGreaterThanOrEqual(0);
      expect(s).toBeLessThanOrEqual(1);
    }
  });

  it("repeated identical requests are byte-identical", async () => {
    const base = await listen(loadCheckpoint("m"));
    await new Promise((r) => setTimeout(r, 10));
    const body = { pairs: Array.from({ length: 8 }, (_, i) => triple(i)) };
    const first = await (await postScore(base, body)).text();
    const second = await (await postScore(base, body)).text();
    expect(second).toBe(first);
  });

  it("scores a copy batch strictly above a scrambled batch on every segment", async () => {
    const base = await listen(loadCheckpoint("m"));
    await new Promise((r) => setTimeout(r, 10));
    const refs = [
      "the treaty was signed after long negotiations between both governments",
      "modern hospitals rely on carefully maintained electronic patient records",
      "the river flows through three countries before reaching the open sea",
    ];
    const srcs = [
      "وقعت المعاهدة بعد مفاوضات طويلة بين الحكومتين",
      "تعتمد المستشفيات الحديثة على سجلات المرضى الالكترونية",
      "يتدفق النهر عبر ثلاث دول قبل الوصول الى البحر",
    ];
    const scramble = (s: string) => s.split(" ").reverse().join(" ");
    const copyBatch = refs.map((ref, i) => ({ src: srcs[i], mt: ref, ref }));
    const scrambledBatch = refs.map((ref, i) => ({ src: srcs[i], mt: scramble(ref), ref }));

    const copy = await (await postScore(base, { pairs: copyBatch })).json();
    const scrambled = await (await postScore(base, { pairs: scrambledBatch })).json();
    for (let i = 0; i < refs.length; i++) {
      expect(copy.segments[i]).toBeGreaterThan(scrambled.segments[i]);
    }
  });

  it("rejects malformed and empty-field bodies with 400", async () => {
    const base = await listen(loadCheckpoint("m"));
    await new Promise((r) => setTimeout(r, 10));
    expect((await postScore(base, "{not json")).status).toBe(400);
    expect((await postScore(base, { pairs: [] })).status).toBe(400);
    expect((await postScore(base, { nope: 1 })).status).toBe(400);
    expect(
      (await postScore(base, { pairs: [{ src: "a", mt: "b" }] })).status,
    ).toBe(400);
    expect(
      (await postScore(base, { pairs: [{ src: "a", mt: "b", ref: "  " }] })).status,
    ).toBe(400);
    expect(
      (await postScore(base, { pairs: [triple(0)], batch_size: -1 })).status,
    ).toBe(400);
  });

  it("rejects oversized batches with 413", async () => {
    const base = await listen(loadCheckpoint("m"));
    await new Promise((r) => setTimeout(r, 10));
    const pairs = Array.from({ length: MAX_BATCH + 1 }, (_, i) => triple(i % 100));
    expect((await postScore(base, { pairs })).status).toBe(413);
  });

  it("answers 503 while loading and 500 on inference failure", async () => {
    let release!: (c: Checkpoint) => void;
    const gate = new Promise<Checkpoint>((resolve) => {
      release = resolve;
    });
    const base = await listen(gate);
    expect((await postScore(base, { pairs: [triple(0)] })).status).toBe(503);

    release({
      modelId: "broken",
      device: "cpu",
      scoreBatch: () => {
        throw new Error("weights corrupted");
      },
    });
    await new Promise((r) => setTimeout(r, 10));
    const res = await postScore(base, { pairs: [triple(0)] });
    expect(res.status).toBe(500);
    expect((await res.json()).error).toContain("weights corrupted");
  });

  it("handles concurrent requests without mixing batches", async () => {
    const base = await listen(loadCheckpoint("m"));
    await new Promise((r) => setTimeout(r, 10));
    const batches = Array.from({ length: 6 }, (_, b) =>
      Array.from({ length: 20 }, (_, i) => triple(b * 100 + i)),
    );
    const responses = await Promise.all(batches.map((pairs) => postScore(base, { pairs })));
    const payloads = await Promise.all(responses.map((r) => r.json()));
    payloads.forEach((payload, b) => {
      expect(payload.segments).toEqual(batches[b].map(scoreTriple));
    });
  });
});
