// @vitest-environment jsdom
//
// Acceptance round-trip against the real curation service: a scripted
// browser session resolves five fixture cards (three accepts, two
// rejects), then the decision log, the progress endpoint, and the
// terminology preview are checked, and a simulated page reload must
// reconstruct the identical state.
import { ChildProcess, execFileSync, spawn } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { CurationApi } from "../src/api.js";
import { CurationApp } from "../src/app.js";

const PYTHON = process.env.PYTHON ?? "python3";

let workdir: string;
let service: ChildProcess;
let baseUrl: string;
let logPath: string;

function startService(candidates: string, log: string): Promise<{ proc: ChildProcess; base: string }> {
  return new Promise((resolve, reject) => {
    const proc = spawn(PYTHON, [
      "-m", "aceminer", "curate", "serve",
      "--candidates", candidates, "--log", log, "--addr", "127.0.0.1:0",
    ]);
    let buffer = "";
    const onData = (chunk: Buffer) => {
      buffer += chunk.toString();
      const match = buffer.match(/listening on (http:\/\/[^\s]+)/);
      if (match) {
        proc.stdout?.off("data", onData);
        resolve({ proc, base: match[1] });
      }
    };
    proc.stdout?.on("data", onData);
    proc.on("error", reject);
    proc.on("exit", (code) => reject(new Error(`service exited early: ${code}\n${buffer}`)));
    setTimeout(() => reject(new Error(`service did not come up:\n${buffer}`)), 15000);
  });
}

async function waitFor(condition: () => boolean, ms = 10000): Promise<void> {
  const start = Date.now();
  while (!condition()) {
    if (Date.now() - start > ms) {
      throw new Error("timed out waiting for condition");
    }
    await new Promise((resolve) => setTimeout(resolve, 20));
  }
}

function freshApp(): { app: CurationApp; root: HTMLElement } {
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById("app") as HTMLElement;
  const app = new CurationApp(root, new CurationApi(baseUrl));
  return { app, root };
}

function snapshot(root: HTMLElement) {
  return {
    queued: [...root.querySelectorAll(".card")].map((c) => c.getAttribute("data-class-iri")),
    progress: root.querySelector("#progress")?.getAttribute("data-resolved"),
    progressText: root.querySelector(".progress-text")?.textContent,
    previewCount: root.querySelector("#preview")?.getAttribute("data-count"),
  };
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "curation-ui-"));
  execFileSync(PYTHON, [
    "-m", "aceminer", "fixtures", "generate", "--kind", "pipeline",
    "--out", join(workdir, "fx"), "--seed", "51", "--classes", "20",
    "--leaves", "12", "--mapped", "8", "--accepted", "0",
    "--project-terms", "0", "--object-properties", "1", "--data-properties", "1",
  ]);
  execFileSync(PYTHON, [
    "-m", "aceminer", "map", "candidates",
    "--ontology", join(workdir, "fx", "ontology.owl"),
    "--lexicon", join(workdir, "fx", "lexicon.tsv"),
    "--out", join(workdir, "candidates.json"),
  ]);
  logPath = join(workdir, "decisions.jsonl");
  const started = await startService(join(workdir, "candidates.json"), logPath);
  service = started.proc;
  baseUrl = started.base;
});

afterAll(() => {
  service?.kill();
});

describe("scripted browser session against the live service", () => {
  it("resolves 5 cards and survives a page reload", async () => {
    const { app, root } = freshApp();
    await app.load();
    await waitFor(() => root.querySelectorAll(".card").length === 12);

    const mappable = () =>
      [...root.querySelectorAll<HTMLElement>(".card")].filter(
        (c) => !(c.querySelector(".btn-accept") as HTMLButtonElement).disabled,
      );
    expect(mappable().length).toBeGreaterThanOrEqual(5);

    // 3 accepts: click the accept button of the first mappable card, thrice
    for (let i = 0; i < 3; i++) {
      const before = root.querySelectorAll(".card").length;
      (mappable()[0].querySelector(".btn-accept") as HTMLButtonElement).click();
      await waitFor(() => root.querySelectorAll(".card").length === before - 1);
    }
    // 2 rejects
    for (let i = 0; i < 2; i++) {
      const before = root.querySelectorAll(".card").length;
      const card = [...root.querySelectorAll<HTMLElement>(".card")][0];
      (card.querySelector(".btn-reject") as HTMLButtonElement).click();
      await waitFor(() => root.querySelectorAll(".card").length === before - 1);
    }

    // decision log has exactly 5 lines, each valid JSON
    const logLines = readFileSync(logPath, "utf-8").trim().split("\n");
    expect(logLines).toHaveLength(5);
    for (const line of logLines) {
      JSON.parse(line);
    }

    // progress endpoint reports 5 resolved
    const progress = await new CurationApi(baseUrl).progress();
    expect(progress.accepted).toBe(3);
    expect(progress.rejected).toBe(2);
    expect(progress.accepted + progress.rejected).toBe(5);

    // preview terminology has 3 entries
    const preview = await new CurationApi(baseUrl).preview();
    expect(preview.entries).toHaveLength(3);

    // the UI mirrors all of that
    const liveState = snapshot(root);
    expect(liveState.progress).toBe("5");
    expect(liveState.previewCount).toBe("3");
    expect(liveState.queued).toHaveLength(7);

    // page reload: a fresh app over a fresh DOM reconstructs identical state
    const reloaded = freshApp();
    await reloaded.app.load();
    await waitFor(() => reloaded.root.querySelectorAll(".card").length > 0);
    expect(snapshot(reloaded.root)).toEqual(liveState);
  });

  it("server rejection surfaces inline without losing the card", async () => {
    const { app, root } = freshApp();
    await app.load();
    await waitFor(() => root.querySelectorAll(".card").length > 0);
    const before = root.querySelectorAll(".card").length;
    const card = [...root.querySelectorAll<HTMLElement>(".card")].find(
      (c) => !(c.querySelector(".btn-accept") as HTMLButtonElement).disabled,
    )!;
    // point the selected radio at a CUI the server never offered
    const radio = card.querySelector<HTMLInputElement>("input[type=radio]:checked")!;
    radio.value = "C0077777";
    (card.querySelector(".btn-accept") as HTMLButtonElement).click();
    await waitFor(() => !(card.querySelector(".card-error") as HTMLElement).hidden);
    expect(card.querySelector(".card-error")?.textContent).toContain("C0077777");
    expect(root.querySelectorAll(".card")).toHaveLength(before);
  });
});
