/**
 * Bootstrap: wire the protocol client, view state, renderer and DOM.
 *
 * Query parameters:
 *   ?server=ws://127.0.0.1:8765  session service address
 *   &image=/abs/path/image.png   server-side image path to load
 *   &mask=/abs/path/truth.png    optional manual mask shown in red
 */

import { connectWebSocket } from "./client.js";
import { Renderer } from "./render.js";
import { UiSession } from "./viewstate.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const params = new URLSearchParams(window.location.search);
const serverUrl = params.get("server") ?? `ws://${window.location.host}`;
const imagePath = params.get("image");
const maskPath = params.get("mask");
const httpBase = serverUrl.replace(/^ws/, "http");

const canvas = byId<HTMLCanvasElement>("view");
const statusEl = byId<HTMLSpanElement>("status");
const toastEl = byId<HTMLDivElement>("toast");
const summaryEl = byId<HTMLDivElement>("summary");
const satisfiedBox = byId<HTMLInputElement>("satisfied");
const acceptButton = byId<HTMLButtonElement>("accept");
const clearButton = byId<HTMLButtonElement>("clear-helpers");

const renderer = new Renderer(canvas);

function refresh(): void {
  const state = session.state;
  statusEl.textContent = !state.connected
    ? "disconnected"
    : state.pendingSeq !== null
      ? `computing (#${state.pendingSeq})`
      : state.image
        ? `${state.image.width}x${state.image.height} @ ${state.image.spacing} mm/px`
        : "no image";
  acceptButton.disabled = !state.connected || state.contour === null;
  satisfiedBox.disabled = !state.connected;
  clearButton.disabled = !session.canEdit();
  canvas.classList.toggle("disabled", !session.canEdit());
  toastEl.textContent = state.toast ?? "";
  toastEl.classList.toggle("visible", state.toast !== null);
  if (state.summary) {
    const s = state.summary;
    summaryEl.innerHTML =
      `<b>accepted</b> (satisfied: ${s.satisfied})<br>` +
      `diameter a: ${s.diameterAmm.toFixed(2)} mm<br>` +
      `diameter b: ${s.diameterBmm.toFixed(2)} mm<br>` +
      (s.interactionS !== null ? `interaction: ${s.interactionS.toFixed(1)} s<br>` : "") +
      `saved to: ${s.outDir}`;
  }
  renderer.draw(state);
}

const transport = connectWebSocket(
  serverUrl,
  (raw) => session.handleServer(raw),
  () => session.handleDisconnect(),
);
const session = new UiSession((msg) => transport.send(msg), refresh);

// -- pointer interaction: left-drag moves the seed, shift-click drops a helper

let dragging = false;
let pendingDrag: { x: number; y: number } | null = null;

canvas.addEventListener("pointerdown", (ev) => {
  if (!session.canEdit() || ev.button !== 0) return;
  const pos = renderer.toImageCoords(ev.clientX, ev.clientY);
  if (ev.shiftKey) {
    session.addHelper(pos.x, pos.y);
    return;
  }
  dragging = true;
  canvas.setPointerCapture(ev.pointerId);
  pendingDrag = pos;
});

canvas.addEventListener("pointermove", (ev) => {
  if (!dragging) return;
  pendingDrag = renderer.toImageCoords(ev.clientX, ev.clientY);
});

canvas.addEventListener("pointerup", () => {
  dragging = false;
});

canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  renderer.zoomAt(ev.clientX, ev.clientY, ev.deltaY < 0 ? 1.15 : 1 / 1.15);
  refresh();
});

// drag events are throttled to the display refresh rate; the service's
// latest-wins coalescing absorbs anything faster
function frame(): void {
  if (pendingDrag !== null) {
    session.dragTo(pendingDrag.x, pendingDrag.y);
    pendingDrag = null;
  }
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);

satisfiedBox.addEventListener("change", () => session.setSatisfied(satisfiedBox.checked));
acceptButton.addEventListener("click", () => session.accept());
clearButton.addEventListener("click", () => session.clearHelpers());

async function start(): Promise<void> {
  if (!imagePath) {
    session.state.toast = "add ?image=<server-side path> to the URL";
    refresh();
    return;
  }
  await renderer.setImage(`${httpBase}/image/${encodeURIComponent(imagePath)}`);
  if (maskPath) {
    await renderer.setReferenceMask(`${httpBase}/image/${encodeURIComponent(maskPath)}`);
  }
  session.loadImage(imagePath);
  refresh();
}

window.addEventListener("load", () => {
  start().catch((err) => {
    session.state.toast = String(err);
    refresh();
  });
});
