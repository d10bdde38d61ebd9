/**
 * Canvas rendering: image, optional manual-mask overlay (red), live contour
 * (yellow), seed and helper markers, all in image coordinates under one
 * zoom/pan transform. Image pixels map 1:1 to canvas pixels at zoom 1.
 */

import { ViewState } from "./viewstate.js";

export interface ViewTransform {
  zoom: number;
  panX: number;
  panY: number;
}

export class Renderer {
  readonly transform: ViewTransform = { zoom: 1, panX: 0, panY: 0 };
  private image: ImageBitmap | null = null;
  private referenceMask: HTMLCanvasElement | null = null;

  constructor(private readonly canvas: HTMLCanvasElement) {}

  async setImage(url: string): Promise<void> {
    const response = await fetch(url);
    if (!response.ok) throw new Error(`image fetch failed: ${response.status}`);
    this.image = await createImageBitmap(await response.blob());
  }

  /** Manual reference mask, tinted red for visual comparison. */
  async setReferenceMask(url: string): Promise<void> {
    const response = await fetch(url);
    if (!response.ok) throw new Error(`mask fetch failed: ${response.status}`);
    const bitmap = await createImageBitmap(await response.blob());
    const tinted = document.createElement("canvas");
    tinted.width = bitmap.width;
    tinted.height = bitmap.height;
    const ctx = tinted.getContext("2d")!;
    ctx.drawImage(bitmap, 0, 0);
    const data = ctx.getImageData(0, 0, tinted.width, tinted.height);
    const px = data.data;
    for (let i = 0; i < px.length; i += 4) {
      const on = px[i]! > 0;
      px[i] = 255;
      px[i + 1] = 0;
      px[i + 2] = 0;
      px[i + 3] = on ? 96 : 0;
    }
    ctx.putImageData(data, 0, 0);
    this.referenceMask = tinted;
  }

  toImageCoords(clientX: number, clientY: number): { x: number; y: number } {
    const rect = this.canvas.getBoundingClientRect();
    const { zoom, panX, panY } = this.transform;
    return {
      x: (clientX - rect.left - panX) / zoom,
      y: (clientY - rect.top - panY) / zoom,
    };
  }

  zoomAt(clientX: number, clientY: number, factor: number): void {
    const before = this.toImageCoords(clientX, clientY);
    this.transform.zoom = Math.min(16, Math.max(0.25, this.transform.zoom * factor));
    const rect = this.canvas.getBoundingClientRect();
    this.transform.panX = clientX - rect.left - before.x * this.transform.zoom;
    this.transform.panY = clientY - rect.top - before.y * this.transform.zoom;
  }

  draw(state: ViewState): void {
    const ctx = this.canvas.getContext("2d")!;
    ctx.setTransform(1, 0, 0, 1, 0, 0);
    ctx.fillStyle = "#101418";
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);

    const { zoom, panX, panY } = this.transform;
    ctx.setTransform(zoom, 0, 0, zoom, panX, panY);
    ctx.imageSmoothingEnabled = zoom < 1;

    if (this.image) ctx.drawImage(this.image, 0, 0);
    if (this.referenceMask) ctx.drawImage(this.referenceMask, 0, 0);

    if (state.contour && state.contour.length >= 3) {
      ctx.beginPath();
      const first = state.contour[0]!;
      ctx.moveTo(first[0], first[1]);
      for (const [x, y] of state.contour.slice(1)) ctx.lineTo(x, y);
      ctx.closePath();
      ctx.strokeStyle = "#ffe04a"; // algorithmic contour: yellow
      ctx.lineWidth = 1.5 / zoom;
      ctx.stroke();
    }

    for (const helper of state.helpers) {
      ctx.beginPath();
      ctx.arc(helper.x, helper.y, 3 / zoom, 0, 2 * Math.PI);
      ctx.strokeStyle = "#6fd3ff";
      ctx.lineWidth = 1.5 / zoom;
      ctx.stroke();
    }

    if (state.seed) {
      const r = 4 / zoom;
      ctx.beginPath();
      ctx.moveTo(state.seed.x - r, state.seed.y);
      ctx.lineTo(state.seed.x + r, state.seed.y);
      ctx.moveTo(state.seed.x, state.seed.y - r);
      ctx.lineTo(state.seed.x, state.seed.y + r);
      ctx.strokeStyle = state.pendingSeq === null ? "#6aff8f" : "#ffb36a";
      ctx.lineWidth = 1.5 / zoom;
      ctx.stroke();
    }
  }
}
