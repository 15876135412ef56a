/** Browser entry: wires the scene editor, run monitor, and field viewer.
 *
 * Serve the mesobench API (`mesobench serve --port 8423 --data ./data`)
 * and open index.html through any static server that proxies /api/v1 to
 * it (or set the base input field to the service origin).
 */

import { ApiClient, ApiError } from './api.js';
import { project, speciesColor, type ViewState } from './atoms.js';
import {
  bandOverlay,
  cellAt,
  drawOverlay,
  drawToCanvas,
  renderFrame,
  type RenderedField,
} from './fieldRender.js';
import { JobMonitor } from './monitor.js';
import { SceneEditor } from './scene.js';
import type { Band, FieldFramePayload, Manifest } from './types.js';

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const state: {
  api: ApiClient;
  editor: SceneEditor | null;
  sceneId: string | null;
  monitor: JobMonitor | null;
  jobId: string | null;
  frame: FieldFramePayload | null;
  bands: Band[];
  view: ViewState;
} = {
  api: new ApiClient(),
  editor: null,
  sceneId: null,
  monitor: null,
  jobId: null,
  frame: null,
  bands: [],
  view: { yaw: 0.6, pitch: 0.4, zoom: 5 },
};

const DEFAULT_SCENE = `{
  "scene_version": 1,
  "kind": "meso-simulation",
  "grid": {"nx": 60, "ny": 70, "width": 13.5, "height": 15.7},
  "grains": {"count": 60, "delta": 0.3, "seed": 7},
  "schedule": {"load": {"axis": "y", "target_strain": 0.007},
               "output": {"frames": 2}}
}`;

function setStatus(text: string): void {
  $('status').textContent = text;
}

function refreshValidation(): void {
  const editor = state.editor;
  const list = $('errors');
  list.innerHTML = '';
  if (!editor) return;
  for (const err of editor.errors) {
    const item = document.createElement('li');
    item.textContent = `${err.path}: ${err.message}`;
    list.appendChild(item);
  }
  ($('save') as HTMLButtonElement).disabled = !editor.canSubmit();
}

function loadEditor(text: string): void {
  state.editor = new SceneEditor(text);
  ($('scene-text') as HTMLTextAreaElement).value = text;
  refreshValidation();
}

async function saveScene(): Promise<void> {
  const editor = state.editor;
  if (!editor || !editor.canSubmit()) return;
  try {
    const { scene_id } = await state.api.postScene(editor.serialize());
    state.sceneId = scene_id;
    setStatus(`scene saved: ${scene_id}`);
  } catch (err) {
    setStatus('save failed');
    const apiErrors = (err as ApiError).errors;
    if (apiErrors) {
      // server-side findings rendered at their document paths, like the
      // local checks
      const list = $('errors');
      list.innerHTML = '';
      for (const e of apiErrors) {
        const item = document.createElement('li');
        item.textContent = `${e.path}: ${e.message}`;
        list.appendChild(item);
      }
    } else {
      setStatus(`save failed: ${(err as Error).message}`);
    }
  }
}

async function runJob(): Promise<void> {
  if (!state.sceneId) {
    setStatus('save the scene first');
    return;
  }
  try {
    const { job_id } = await state.api.submitJob(state.sceneId);
    state.jobId = job_id;
    watchJob(job_id);
  } catch (err) {
    setStatus(`submit failed: ${(err as Error).message}`);
  }
}

function watchJob(jobId: string): void {
  state.monitor?.stop();
  const bar = $('progress') as HTMLProgressElement;
  state.monitor = new JobMonitor(state.api, jobId, {
    onUpdate: (manifest: Manifest) => {
      bar.value = manifest.progress;
      setStatus(`job ${jobId}: ${manifest.status}`
        + (manifest.quasi_static === false ? ' (not quasi-static!)' : ''));
      if (manifest.status === 'done') void showResults(jobId);
      if (manifest.status === 'failed') setStatus(`job failed: ${manifest.error}`);
    },
    onMissing: () => setStatus('run missing'),
    onNetworkTrouble: (n) => setStatus(`network trouble (${n} failed polls)`),
  });
  state.monitor.start();
}

async function showResults(jobId: string): Promise<void> {
  const history = await state.api.getHistory(jobId);
  drawHistory(history.columns, history.rows);
  state.frame = await state.api.getField(jobId, fieldName());
  state.bands = await state.api.getBands(jobId).catch(() => []);
  drawField();
}

function fieldName(): string {
  return ($('field-name') as HTMLSelectElement).value;
}

function drawField(): void {
  if (!state.frame) return;
  const rendered: RenderedField = renderFrame(state.frame);
  const canvas = $('field') as HTMLCanvasElement;
  const scale = Math.max(2, Math.floor(560 / Math.max(rendered.width, rendered.height)));
  drawToCanvas(rendered, canvas, scale);
  if (($('show-bands') as HTMLInputElement).checked && state.bands.length) {
    drawOverlay(bandOverlay(state.frame, state.bands), state.frame, canvas, scale);
  }
  $('legend').textContent =
    `${state.frame.name} @ t=${state.frame.time.toFixed(3)} ns   `
    + `min ${rendered.legendMin.toPrecision(3)}   max ${rendered.legendMax.toPrecision(3)}`;
}

function drawHistory(columns: string[], rows: number[][]): void {
  const canvas = $('history') as HTMLCanvasElement;
  const ctx = canvas.getContext('2d');
  if (!ctx || rows.length < 2) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const strainIdx = columns.indexOf('avg_strain');
  const stressIdx = columns.indexOf('avg_stress');
  const xs = rows.map((r) => r[strainIdx]);
  const ys = rows.map((r) => r[stressIdx]);
  const xMax = Math.max(...xs) || 1;
  const yMax = Math.max(...ys) || 1;
  ctx.strokeStyle = '#4da3ff';
  ctx.beginPath();
  rows.forEach((_, k) => {
    const px = (xs[k] / xMax) * (canvas.width - 20) + 10;
    const py = canvas.height - 10 - (ys[k] / yMax) * (canvas.height - 20);
    if (k === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
  ctx.fillStyle = '#ccc';
  ctx.fillText(`stress-strain (max ${yMax.toFixed(3)} GPa at ${(xMax * 100).toFixed(2)}%)`, 12, 12);
}

async function previewLattice(): Promise<void> {
  let spec: unknown;
  try {
    spec = JSON.parse(($('lattice-spec') as HTMLTextAreaElement).value);
  } catch {
    setStatus('lattice spec is not valid JSON');
    return;
  }
  try {
    const preview = await state.api.previewLattice(spec);
    setStatus(`preview: ${preview.count} atoms`);
    drawAtoms(preview.positions, preview.species);
  } catch (err) {
    setStatus(`preview failed: ${(err as Error).message}`);
  }
}

let lastPreview: { positions: [number, number, number][]; species: string[] } | null = null;

function drawAtoms(positions: [number, number, number][], species: string[]): void {
  lastPreview = { positions, species };
  const canvas = $('atoms') as HTMLCanvasElement;
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  ctx.fillStyle = '#10141c';
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  const projected = project(positions, state.view);
  for (const atom of projected) {
    ctx.fillStyle = speciesColor(species[atom.index]);
    ctx.beginPath();
    ctx.arc(canvas.width / 2 + atom.x, canvas.height / 2 + atom.y, 2.5, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function wireAtomRotation(): void {
  const canvas = $('atoms') as HTMLCanvasElement;
  let dragging = false;
  let last: [number, number] = [0, 0];
  canvas.addEventListener('mousedown', (e) => {
    dragging = true;
    last = [e.offsetX, e.offsetY];
  });
  window.addEventListener('mouseup', () => {
    dragging = false;
  });
  canvas.addEventListener('mousemove', (e) => {
    if (!dragging || !lastPreview) return;
    state.view.yaw += (e.offsetX - last[0]) * 0.01;
    state.view.pitch += (e.offsetY - last[1]) * 0.01;
    last = [e.offsetX, e.offsetY];
    drawAtoms(lastPreview.positions, lastPreview.species);
  });
  canvas.addEventListener('wheel', (e) => {
    e.preventDefault();
    state.view.zoom *= e.deltaY < 0 ? 1.1 : 0.9;
    if (lastPreview) drawAtoms(lastPreview.positions, lastPreview.species);
  });
}

function wireFieldHover(): void {
  const canvas = $('field') as HTMLCanvasElement;
  canvas.addEventListener('mousemove', (e) => {
    if (!state.frame) return;
    const cell = cellAt(state.frame, e.offsetX, e.offsetY, canvas.width, canvas.height);
    if (cell) {
      $('hover').textContent = cell.value === null
        ? `cell (${cell.i}, ${cell.j}): gap`
        : `cell (${cell.i}, ${cell.j}): ${cell.value.toExponential(4)}`;
    }
  });
}

function init(): void {
  const baseInput = $('api-base') as HTMLInputElement;
  baseInput.addEventListener('change', () => {
    state.api = new ApiClient(baseInput.value.replace(/\/$/, '') + '/api/v1');
  });

  loadEditor(DEFAULT_SCENE);
  const textArea = $('scene-text') as HTMLTextAreaElement;
  textArea.addEventListener('input', () => {
    try {
      loadEditor(textArea.value);
      setStatus('scene parsed');
    } catch {
      setStatus('scene is not valid JSON');
    }
  });

  $('save').addEventListener('click', () => void saveScene());
  $('run').addEventListener('click', () => void runJob());
  $('undo-all').addEventListener('click', () => {
    state.editor?.undoAll();
    if (state.editor) {
      textArea.value = state.editor.serialize();
      refreshValidation();
    }
  });
  $('preview').addEventListener('click', () => void previewLattice());
  $('field-name').addEventListener('change', () => {
    if (state.jobId) void showResults(state.jobId);
  });
  $('show-bands').addEventListener('change', drawField);
  $('duplicate').addEventListener('click', () => {
    // close the what-if loop: current document becomes a fresh editable copy
    if (state.editor) loadEditor(state.editor.serialize());
    setStatus('scene duplicated for editing');
  });
  wireAtomRotation();
  wireFieldHover();
}

init();
