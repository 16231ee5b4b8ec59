/** Full round trip against a live backend.
 *
 * Spawns the Python API server over a freshly generated corpus, then drives
 * the same ApiClient/Controller code the browser shell runs through 20
 * query/response cycles: 19 definite verdicts plus one "unsure", with one
 * deliberate duplicate submission in the middle. Verifies against
 * GET /state that the history holds exactly 20 records, the iteration
 * counter stayed consistent, the unsure verdict was recorded, and the
 * duplicate left a single record. Finalizing in the expert-confirmed
 * scenario then shows the unsure answer contributed no training label.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { ApiClient } from "../src/api.js";
import { Controller } from "../src/controller.js";
import type { Verdict } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));
const repoRoot = join(here, "..", "..");

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = createServer();
    srv.on("error", reject);
    srv.listen(0, "127.0.0.1", () => {
      const addr = srv.address();
      if (addr === null || typeof addr === "string") {
        reject(new Error("could not allocate a port"));
        return;
      }
      const { port } = addr;
      srv.close(() => resolve(port));
    });
  });
}

async function waitForServer(base: string, proc: ChildProcess, log: () => string): Promise<void> {
  const deadline = Date.now() + 90_000;
  while (Date.now() < deadline) {
    if (proc.exitCode !== null) {
      throw new Error(`server exited early (code ${proc.exitCode}):\n${log()}`);
    }
    try {
      const resp = await fetch(`${base}/sessions/probe/state`);
      if (resp.status > 0) return;
    } catch {
      await new Promise((r) => setTimeout(r, 250));
    }
  }
  throw new Error(`server did not come up in time:\n${log()}`);
}

let tmp: string;
let server: ChildProcess | null = null;
let base: string;
let stderrLog = "";

beforeAll(async () => {
  tmp = mkdtempSync(join(tmpdir(), "iws-ui-"));
  const gen = spawnSync(
    "python3",
    [
      join(repoRoot, "scripts", "make_synthetic_corpus.py"),
      "--out-dir", tmp,
      "--n-train", "600",
      "--n-test", "200",
      "--vocab-size", "60",
      "--seed", "7",
    ],
    { encoding: "utf-8" },
  );
  if (gen.status !== 0) {
    throw new Error(`corpus generation failed:\n${gen.stdout}\n${gen.stderr}`);
  }

  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  server = spawn(
    "python3",
    [
      "-m", "iws.cli", "serve",
      "--corpus", join(tmp, "train.jsonl"),
      "--test", join(tmp, "test.jsonl"),
      "--host", "127.0.0.1",
      "--port", String(port),
      "--sessions-dir", join(tmp, "sessions"),
      "--df-min", "5",
      "--df-max-frac", "0.5",
    ],
    { cwd: repoRoot, stdio: ["ignore", "pipe", "pipe"] },
  );
  server.stdout?.on("data", (chunk: Buffer) => (stderrLog += chunk.toString()));
  server.stderr?.on("data", (chunk: Buffer) => (stderrLog += chunk.toString()));
  await waitForServer(base, server, () => stderrLog);
}, 150_000);

afterAll(async () => {
  if (server !== null && server.exitCode === null) {
    server.kill("SIGTERM");
    await new Promise<void>((resolve) => {
      const force = setTimeout(() => {
        server?.kill("SIGKILL");
        resolve();
      }, 5_000);
      server?.on("exit", () => {
        clearTimeout(force);
        resolve();
      });
    });
  }
  rmSync(tmp, { recursive: true, force: true });
});

describe("live UI round trip", () => {
  it(
    "completes 20 cycles with one unsure and one duplicate submit",
    async () => {
      const client = new ApiClient(base);
      const controller = new Controller(client);

      await controller.start({ mode: "lse_a", T: 20, seed: 3 });
      const session = controller.snapshot().session;
      expect(session).not.toBeNull();
      const sid = session?.session_id ?? "";

      const seenIterations: number[] = [];
      const verdicts = new Map<number, Verdict>();
      let unsureLf = -1;
      let duplicatedLf = -1;

      for (let cycle = 1; cycle <= 20; cycle++) {
        const snap = controller.snapshot();
        expect(snap.phase).toBe("query");
        const query = snap.query;
        if (query === null) throw new Error(`no active query at cycle ${cycle}`);
        expect(snap.snippetsOpen).toBe(false);
        expect(query.snippets.length).toBeGreaterThan(0);
        seenIterations.push(query.iteration);

        let verdict: Verdict;
        if (cycle === 7) {
          verdict = "unsure";
          unsureLf = query.lf_id;
        } else {
          verdict = cycle % 2 === 0 ? "not_useful" : "useful";
        }
        verdicts.set(query.lf_id, verdict);
        await controller.submitVerdict(verdict);
        expect(controller.snapshot().history).toHaveLength(cycle);
        expect(controller.snapshot().banner).toBeNull();

        if (cycle === 3) {
          duplicatedLf = query.lf_id;
          const ack = await client.submit(sid, query.lf_id, verdict, true);
          expect(ack.recorded).toBe(false);
        }
      }

      expect(seenIterations).toEqual(Array.from({ length: 20 }, (_, i) => i + 1));
      expect(controller.snapshot().phase).toBe("complete");

      const state = await client.state(sid);
      expect(state.status).toBe("complete");
      expect(state.iteration).toBe(20);
      expect(state.history).toHaveLength(20);
      expect(new Set(state.history.map((h) => h.lf_id)).size).toBe(20);

      const unsureRows = state.history.filter((h) => h.response === "unsure");
      expect(unsureRows).toHaveLength(1);
      expect(unsureRows[0]?.lf_id).toBe(unsureLf);

      expect(state.history.filter((h) => h.lf_id === duplicatedLf)).toHaveLength(1);
      for (const row of state.history) {
        expect(row.response).toBe(verdicts.get(row.lf_id));
      }
      expect(state.history.map((h) => h.lf_id)).toEqual(
        controller.snapshot().history.map((h) => h.lf_id),
      );

      await controller.finalize("as");
      const metrics = controller.snapshot().finalized;
      expect(metrics).not.toBeNull();
      if (metrics === null) throw new Error("finalize produced no metrics");
      expect(metrics.scenario).toBe("as");
      const usefulIds = state.history
        .filter((h) => h.response === "useful")
        .map((h) => h.lf_id)
        .sort((a, b) => a - b);
      expect([...metrics.selected].sort((a, b) => a - b)).toEqual(usefulIds);
      expect(metrics.selected).not.toContain(unsureLf);
    },
    240_000,
  );

  it(
    "a fresh controller rebuilds the finished session from GET /state",
    async () => {
      const client = new ApiClient(base);
      const driver = new Controller(client);
      await driver.start({ mode: "random", T: 8, seed: 11 });
      const sid = driver.snapshot().session?.session_id ?? "";
      for (let cycle = 1; cycle <= 3; cycle++) {
        await driver.submitVerdict("useful");
      }

      const reloaded = new Controller(client);
      await reloaded.restore(sid);
      const snap = reloaded.snapshot();
      expect(snap.phase).toBe("query");
      expect(snap.history).toHaveLength(3);
      expect(snap.session?.session_id).toBe(sid);
      expect(snap.snippetsOpen).toBe(false);
      expect(snap.query?.lf_id).toBe(driver.snapshot().query?.lf_id);
    },
    120_000,
  );
});
