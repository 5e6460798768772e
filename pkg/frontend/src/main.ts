import { ServiceClient, SessionStream, type StreamState } from "./api.js";
import { parseJsonl, SchemaError } from "./schema.js";
import { FileReplaySource } from "./replay.js";
import { SessionStore } from "./session.js";
import { skeletonScene } from "./skeleton.js";
import { angleSeries, crossMarks, correctionVectors, reportUpTo } from "./chart.js";
import { paintSkeleton, paintChart } from "./draw.js";
import type { KeypointFrameMsg, SessionReport } from "./types.js";

// Browser shell: wires the pure view models to the DOM. All analysis
// numbers on screen come from service events and reports.

function must<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const baseUrlInput = must<HTMLInputElement>("base-url");
const poseClassInput = must<HTMLInputElement>("pose-class");
const fileInput = must<HTMLInputElement>("replay-file");
const speedSelect = must<HTMLSelectElement>("replay-speed");
const startBtn = must<HTMLButtonElement>("btn-start");
const pauseBtn = must<HTMLButtonElement>("btn-pause");
const resumeBtn = must<HTMLButtonElement>("btn-resume");
const stopBtn = must<HTMLButtonElement>("btn-stop");
const reportBtn = must<HTMLButtonElement>("btn-report");
const connPill = must<HTMLSpanElement>("conn-pill");
const statusLine = must<HTMLParagraphElement>("status-line");
const poseLabelEl = must<HTMLDivElement>("pose-label");
const probsEl = must<HTMLUListElement>("pose-probs");
const badgesEl = must<HTMLDivElement>("badges");
const skeletonCanvas = must<HTMLCanvasElement>("skeleton-canvas");
const chartCanvas = must<HTMLCanvasElement>("chart-canvas");
const angleSelect = must<HTMLSelectElement>("angle-select");
const scrubInput = must<HTMLInputElement>("scrub");
const scrubLabel = must<HTMLSpanElement>("scrub-label");
const reportEmpty = must<HTMLParagraphElement>("report-empty");

const store = new SessionStore();
let client: ServiceClient | null = null;
let stream: SessionStream | null = null;
let sessionId: string | null = null;
let replay: FileReplaySource | null = null;
let frames: KeypointFrameMsg[] = [];
let report: SessionReport | null = null;

function setStatus(text: string, isError = false): void {
  statusLine.textContent = text;
  statusLine.className = isError ? "status error" : "status";
}

function renderConnection(): void {
  connPill.textContent = store.connection;
  connPill.className = `pill pill-${store.connection}`;
}

function renderPose(): void {
  poseLabelEl.textContent = store.poseLabel ?? "(no recognition yet)";
  probsEl.replaceChildren(
    ...store.probsPercent().map((entry) => {
      const li = document.createElement("li");
      li.textContent = `${entry.label}: ${entry.pct.toFixed(1)}%`;
      return li;
    }),
  );
}

function renderBadges(): void {
  badgesEl.replaceChildren(
    ...store.badges.map((badge) => {
      const div = document.createElement("div");
      div.className = "badge";
      const sign = badge.delta >= 0 ? "+" : "";
      div.textContent = `${badge.angle}  ${sign}${badge.delta.toFixed(3)} rad`;
      div.title = `deviation ${badge.deviation.toFixed(3)} rad at frame ${badge.frame}`;
      return div;
    }),
  );
}

function renderSkeleton(): void {
  const ctx = skeletonCanvas.getContext("2d");
  if (!ctx || !store.lastFrame) return;
  const scene = skeletonScene(store.lastFrame.landmarks, store.flaggedJoints, {
    width: skeletonCanvas.width,
    height: skeletonCanvas.height,
  });
  paintSkeleton(ctx, scene);
}

function renderChart(): void {
  const ctx = chartCanvas.getContext("2d");
  if (!ctx) return;
  const doc = report?.correction ?? null;
  if (!doc || doc.frames.length === 0) {
    ctx.clearRect(0, 0, chartCanvas.width, chartCanvas.height);
    reportEmpty.hidden = false;
    return;
  }
  reportEmpty.hidden = true;
  const angleIndex = Number(angleSelect.value);
  const cursor = Number(scrubInput.value);
  const visible = reportUpTo(doc, cursor);
  paintChart(
    ctx,
    angleSeries(visible, angleIndex),
    crossMarks(visible),
    correctionVectors(visible),
    cursor,
  );
  scrubLabel.textContent = `frame ${cursor} / ${doc.frames[doc.frames.length - 1].frame_index}`;
}

function onStreamState(state: StreamState): void {
  store.setConnection(state === "connecting" ? "connecting" : state);
  renderConnection();
  if (state === "reconnecting") setStatus("connection lost, reconnecting...", true);
  if (state === "open") setStatus("streaming");
}

async function startSession(): Promise<void> {
  const file = fileInput.files?.[0];
  if (!file) {
    setStatus("pick a keypoint JSONL file first", true);
    return;
  }
  let text: string;
  try {
    text = await file.text();
    frames = parseJsonl(text);
  } catch (exc) {
    if (exc instanceof SchemaError) {
      setStatus(`replay file rejected: ${exc.message}`, true);
      return;
    }
    throw exc;
  }
  if (frames.length === 0) {
    setStatus("replay file has no frames", true);
    return;
  }

  client = new ServiceClient(baseUrlInput.value.trim() || "http://localhost:8077");
  try {
    await client.health();
  } catch (exc) {
    setStatus(`service unreachable: ${(exc as Error).message}`, true);
    return;
  }

  const poseClass = poseClassInput.value.trim();
  try {
    sessionId = await client.createSession(poseClass ? { pose_class: poseClass } : {});
  } catch (exc) {
    setStatus(`session create failed: ${(exc as Error).message}`, true);
    return;
  }

  store.reset();
  report = null;
  renderPose();
  renderBadges();
  renderChart();

  stream = new SessionStream(client.streamUrl(sessionId), {
    onEvent: (ev) => {
      store.applyEvent(ev);
      if (ev.type === "error") setStatus(`service error: ${ev.message}`, true);
      renderPose();
      renderBadges();
      renderSkeleton();
    },
    onState: onStreamState,
  });

  const speed = Number(speedSelect.value) || 1;
  replay = new FileReplaySource(
    frames,
    {
      onFrame: (frame) => {
        store.recordLocalFrame(frame);
        stream?.sendFrame(frame);
        renderSkeleton();
      },
      onDone: () => {
        setStatus(`replay finished (${frames.length} frames); fetch the report when ready`);
        reportBtn.disabled = false;
      },
    },
    { speed },
  );
  replay.start();
  setStatus(`replaying ${frames.length} frames at ${speed}x`);
  startBtn.disabled = true;
  pauseBtn.disabled = false;
  resumeBtn.disabled = true;
  stopBtn.disabled = false;
}

async function stopSession(): Promise<void> {
  replay?.stop();
  stream?.close();
  if (client && sessionId) {
    try {
      await client.closeSession(sessionId);
    } catch {
      // report stays readable even if close raced the server
    }
  }
  startBtn.disabled = false;
  pauseBtn.disabled = true;
  resumeBtn.disabled = true;
  stopBtn.disabled = true;
  reportBtn.disabled = sessionId === null;
  setStatus("session stopped");
}

async function fetchReport(): Promise<void> {
  if (!client || !sessionId) return;
  try {
    report = await client.report(sessionId);
  } catch (exc) {
    setStatus(`report fetch failed: ${(exc as Error).message}`, true);
    return;
  }
  const doc = report.correction;
  if (!doc || doc.frames.length === 0) {
    setStatus("report has no correction data for this session");
    renderChart();
    return;
  }
  angleSelect.replaceChildren(
    ...doc.angle_names.map((name, i) => {
      const opt = document.createElement("option");
      opt.value = String(i);
      opt.textContent = name;
      return opt;
    }),
  );
  const worst = doc.summary.worst_angle;
  const worstIdx = worst ? doc.angle_names.indexOf(worst) : -1;
  angleSelect.value = String(worstIdx >= 0 ? worstIdx : 0);
  const first = doc.frames[0].frame_index;
  const last = doc.frames[doc.frames.length - 1].frame_index;
  scrubInput.min = String(first);
  scrubInput.max = String(last);
  scrubInput.value = String(last);
  scrubInput.disabled = false;
  angleSelect.disabled = false;
  setStatus(
    `report: ${doc.summary.flagged_count} flags over ` +
    `${doc.summary.flagged_frame_count} of ${doc.summary.frame_count} frames`,
  );
  renderChart();
}

startBtn.addEventListener("click", () => void startSession());
pauseBtn.addEventListener("click", () => {
  replay?.pause();
  pauseBtn.disabled = true;
  resumeBtn.disabled = false;
  setStatus("replay paused");
});
resumeBtn.addEventListener("click", () => {
  replay?.resume();
  pauseBtn.disabled = false;
  resumeBtn.disabled = true;
  setStatus("replay resumed");
});
stopBtn.addEventListener("click", () => void stopSession());
reportBtn.addEventListener("click", () => void fetchReport());
angleSelect.addEventListener("change", renderChart);
scrubInput.addEventListener("input", renderChart);

renderConnection();
setStatus("ready");
