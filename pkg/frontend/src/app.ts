/** Browser entry: wires the WebSocket stream, parameter form, canvas, and
 * transport controls to the ViewModel.  Everything testable lives in
 * wire.ts / viewmodel.ts / render.ts; this file is DOM glue. */

import { decodeMessage } from "./wire.js";
import { ParamDescriptor, ViewModel } from "./viewmodel.js";
import { Draw2D, renderFrame } from "./render.js";

const SCALE = 4;

const vm = new ViewModel();
const canvas = document.getElementById("view") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const bannerEl = document.getElementById("banner")!;
const statusEl = document.getElementById("status")!;
const revisionEl = document.getElementById("revision")!;
const paramsEl = document.getElementById("params")!;

let renderQueued = false;

function scheduleRender(): void {
  if (renderQueued) return;
  renderQueued = true;
  requestAnimationFrame(() => {
    renderQueued = false;
    if (vm.frame && vm.cells) {
      canvas.width = vm.frame.costmap.width * SCALE;
      canvas.height = vm.frame.costmap.height * SCALE;
      // CanvasRenderingContext2D's style setters also accept gradients;
      // we only ever write CSS color strings, so the narrow view is safe.
      renderFrame(ctx as unknown as Draw2D, vm.frame, vm.cells, SCALE);
    }
    bannerEl.textContent = vm.banner ?? "";
    statusEl.textContent = `${vm.status} · seq ${vm.seq} · ${vm.frame?.state ?? ""}`;
    revisionEl.textContent = `rev ${vm.revision}`;
  });
}

async function patchParam(name: string, value: number, input: HTMLInputElement): Promise<void> {
  vm.beginPatch(name);
  input.disabled = true;
  const res = await fetch("/params", {
    method: "PATCH",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ values: { [name]: value } }),
  });
  const body = await res.json();
  if (res.ok) {
    vm.ackPatch(name, body.revision);
  } else {
    vm.rejectPatch(name, body.error ?? "patch rejected");
    input.value = String(vm.entry(name).value);
  }
  input.disabled = false;
  scheduleRender();
}

function buildForm(descriptors: ParamDescriptor[]): void {
  paramsEl.textContent = "";
  for (const d of descriptors) {
    if (d.type !== "float" && d.type !== "int") continue;
    const row = document.createElement("label");
    row.className = "param";
    row.textContent = d.name;
    row.title = d.doc;
    const input = document.createElement("input");
    input.type = "range";
    input.min = String(d.min ?? 0);
    input.max = String(d.max ?? 100);
    input.step = d.type === "int" ? "1" : "any";
    input.value = String(d.value);
    const readout = document.createElement("span");
    readout.textContent = String(d.value);
    input.addEventListener("input", () => {
      const v = vm.edit(d.name, Number(input.value));
      input.value = String(v);
      readout.textContent = String(v);
    });
    input.addEventListener("change", () => {
      void patchParam(d.name, Number(input.value), input);
    });
    row.append(input, readout);
    paramsEl.append(row);
  }
}

async function control(action: string, extra: Record<string, unknown> = {}): Promise<void> {
  await fetch("/control", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ action, ...extra }),
  });
}

function wireTransport(): void {
  document.getElementById("pause")!.addEventListener("click", () => void control("pause"));
  document.getElementById("resume")!.addEventListener("click", () => void control("resume"));
  document.getElementById("step")!.addEventListener("click", () => void control("step", { count: 1 }));
  document.getElementById("reset")!.addEventListener("click", () => {
    void control("reset").then(() => {
      vm.seq = -1;
      vm.cells = null;
    });
  });
  canvas.addEventListener("click", (ev) => {
    const rect = canvas.getBoundingClientRect();
    const world = vm.canvasToWorld(ev.clientX - rect.left, ev.clientY - rect.top, SCALE);
    if (!world) return;
    void fetch("/goal", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ x: world[0], y: world[1], theta: 0 }),
    }).then(async (res) => {
      if (!res.ok) {
        vm.banner = (await res.json()).error ?? "goal rejected";
        scheduleRender();
      }
    });
  });
}

function connect(): void {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  const ws = new WebSocket(`${proto}://${location.host}/stream`);
  vm.status = "connecting";
  ws.onopen = () => {
    vm.status = "live";
    scheduleRender();
  };
  ws.onmessage = (ev) => {
    try {
      if (vm.ingest(decodeMessage(ev.data as string))) scheduleRender();
    } catch (err) {
      vm.decodeError(String(err));
      scheduleRender();
    }
  };
  ws.onclose = () => {
    vm.status = "closed";
    scheduleRender();
    setTimeout(connect, 1000);
  };
  ws.onerror = () => {
    vm.status = "error";
    scheduleRender();
  };
}

async function start(): Promise<void> {
  const res = await fetch("/params");
  const body = await res.json();
  vm.loadDescriptors(body.revision, body.params);
  buildForm(body.params);
  wireTransport();
  connect();
}

void start();
