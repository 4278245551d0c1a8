/** SVG decision-graph chart: density over feature value, with draggable cuts. */

import type { GraphPoint } from "./api.js";

export const WIDTH = 800;
export const HEIGHT = 400;
export const MARGIN = { left: 56, right: 20, top: 16, bottom: 40 };

const SVG_NS = "http://www.w3.org/2000/svg";

export interface Scale {
  toX(value: number): number;
  fromX(x: number): number;
  toY(density: number): number;
}

export function makeScale(
  domain: [number, number],
  maxDensity: number,
  logScale: boolean,
): Scale {
  const [lo, hi] = domain;
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const span = hi - lo || 1;
  const yTop = logScale ? Math.log10(Math.max(maxDensity, 1)) || 1 : maxDensity || 1;
  return {
    toX: (v) => MARGIN.left + ((v - lo) / span) * plotW,
    fromX: (x) => lo + ((x - MARGIN.left) / plotW) * span,
    toY: (rho) => {
      const scaled = logScale ? Math.log10(Math.max(rho, 1)) : rho;
      return MARGIN.top + plotH - (scaled / yTop) * plotH;
    },
  };
}

export interface ChartCallbacks {
  onAdd(value: number): void;
  onMove(index: number, value: number): void;
  onRemove(index: number): void;
}

function el(name: string, attrs: Record<string, string | number>): SVGElement {
  const node = document.createElementNS(SVG_NS, name);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, String(v));
  return node;
}

function clientToSvgX(svg: SVGSVGElement, clientX: number): number {
  const rect = svg.getBoundingClientRect();
  const width = rect.width || WIDTH;
  return ((clientX - rect.left) / width) * WIDTH;
}

/** Re-render the chart into ``svg``. Pure DOM, no layout dependence. */
export function renderGraph(
  svg: SVGSVGElement,
  points: GraphPoint[],
  boundaries: number[],
  logScale: boolean,
  callbacks: ChartCallbacks,
): void {
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.innerHTML = "";

  if (points.length === 0) {
    const empty = el("text", {
      x: WIDTH / 2,
      y: HEIGHT / 2,
      "text-anchor": "middle",
      class: "empty-state",
    });
    empty.textContent = "No observed values in this dimension.";
    svg.appendChild(empty);
    return;
  }

  let lo = points[0].value;
  let hi = points[0].value;
  let maxDensity = 0;
  for (const p of points) {
    lo = Math.min(lo, p.value);
    hi = Math.max(hi, p.value);
    maxDensity = Math.max(maxDensity, p.density);
  }
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const scale = makeScale([lo, hi], maxDensity, logScale);

  const plotBottom = HEIGHT - MARGIN.bottom;
  svg.appendChild(el("line", {
    x1: MARGIN.left, y1: plotBottom, x2: WIDTH - MARGIN.right, y2: plotBottom,
    class: "axis",
  }));
  svg.appendChild(el("line", {
    x1: MARGIN.left, y1: MARGIN.top, x2: MARGIN.left, y2: plotBottom,
    class: "axis",
  }));
  for (const frac of [0, 0.25, 0.5, 0.75, 1]) {
    const v = lo + frac * (hi - lo);
    const label = el("text", {
      x: scale.toX(v), y: plotBottom + 18, "text-anchor": "middle", class: "tick",
    });
    label.textContent = v.toPrecision(4);
    svg.appendChild(label);
  }
  const yLabel = el("text", {
    x: MARGIN.left - 8, y: MARGIN.top + 8, "text-anchor": "end", class: "tick",
  });
  yLabel.textContent = logScale ? `log ${maxDensity}` : String(maxDensity);
  svg.appendChild(yLabel);

  // click on the canvas adds a boundary at that x
  const hit = el("rect", {
    x: MARGIN.left, y: MARGIN.top,
    width: WIDTH - MARGIN.left - MARGIN.right,
    height: HEIGHT - MARGIN.top - MARGIN.bottom,
    fill: "transparent", class: "canvas-hit",
  });
  hit.addEventListener("click", (evt) => {
    callbacks.onAdd(scale.fromX(clientToSvgX(svg, (evt as MouseEvent).clientX)));
  });
  svg.appendChild(hit);

  for (const p of points) {
    svg.appendChild(el("circle", {
      cx: scale.toX(p.value), cy: scale.toY(p.density), r: 2.5, class: "pt",
    }));
  }

  boundaries.forEach((b, index) => {
    const x = scale.toX(b);
    const line = el("line", {
      x1: x, y1: MARGIN.top, x2: x, y2: plotBottom, class: "boundary",
      "data-index": index,
    });
    const grip = el("line", {
      x1: x, y1: MARGIN.top, x2: x, y2: plotBottom, class: "boundary-grip",
      "data-index": index, stroke: "transparent", "stroke-width": 14,
    });
    const startDrag = (down: Event) => {
      down.preventDefault();
      const onMove = (move: Event) => {
        const cx = (move as MouseEvent).clientX;
        callbacks.onMove(index, scale.fromX(clientToSvgX(svg, cx)));
      };
      const onUp = () => {
        svg.ownerDocument.removeEventListener("pointermove", onMove);
        svg.ownerDocument.removeEventListener("pointerup", onUp);
      };
      svg.ownerDocument.addEventListener("pointermove", onMove);
      svg.ownerDocument.addEventListener("pointerup", onUp);
    };
    const remove = (evt: Event) => {
      evt.preventDefault();
      callbacks.onRemove(index);
    };
    for (const node of [line, grip]) {
      node.addEventListener("pointerdown", startDrag);
      node.addEventListener("contextmenu", remove);
    }
    svg.appendChild(line);
    svg.appendChild(grip);
  });
}
