// SVG board renderer: terrain polygons, military-style unit markers, and
// click targets. Pure view: every highlight comes from the server's
// legal-action list, never from client-side rules.

import { boardPixelSize, hexCenter, hexCorners, type Layout } from "./hexlayout.js";
import {
  decodeTerrain,
  type ActionPayload,
  type StateDict,
  type TerrainName,
  type UnitPayload,
} from "./types.js";

export const TERRAIN_FILL: Record<TerrainName, string> = {
  clear: "#dbe7c6",
  rough: "#a98c5f",
  urban: "#9c9c9c",
  water: "#5b8fd4",
};

const FACTION_STROKE = { blue: "#1d4f9e", red: "#b03030" } as const;

const SVG_NS = "http://www.w3.org/2000/svg";

export interface BoardHandlers {
  onSelectUnit?(unitId: number): void;
  onAction?(action: ActionPayload): void;
}

export class BoardView {
  layout: Layout = { size: 26, originX: 34, originY: 34 };
  svg: SVGSVGElement | null = null;

  constructor(public root: HTMLElement) {}

  render(
    state: StateDict,
    legal: Record<string, ActionPayload[]>,
    selectedUnit: number | null,
    handlers: BoardHandlers = {},
  ): void {
    const doc = this.root.ownerDocument;
    const svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    const { w, h } = boardPixelSize(this.layout, state.width, state.height);
    svg.setAttribute("viewBox", `0 0 ${w} ${h}`);
    svg.setAttribute("width", String(w));
    svg.setAttribute("class", "board");

    const terrain = decodeTerrain(state);
    for (let row = 0; row < state.height; row++) {
      for (let col = 0; col < state.width; col++) {
        const name = terrain[row * state.width + col]!;
        const poly = doc.createElementNS(SVG_NS, "polygon");
        poly.setAttribute("points", hexCorners(this.layout, col, row));
        poly.setAttribute("fill", TERRAIN_FILL[name]);
        poly.setAttribute("stroke", "#667");
        poly.setAttribute("stroke-width", "1");
        poly.setAttribute("data-col", String(col));
        poly.setAttribute("data-row", String(row));
        poly.setAttribute("data-terrain", name);
        svg.appendChild(poly);
      }
    }

    // target highlights for the selected unit only
    const actions = selectedUnit !== null ? (legal[String(selectedUnit)] ?? []) : [];
    for (const action of actions) {
      if (!action.target) continue;
      const [col, row] = action.target;
      const ring = doc.createElementNS(SVG_NS, "circle");
      const { x, y } = hexCenter(this.layout, col, row);
      ring.setAttribute("cx", String(x));
      ring.setAttribute("cy", String(y));
      ring.setAttribute("r", String(this.layout.size * 0.72));
      ring.setAttribute("class", `target ${action.kind}`);
      ring.setAttribute("fill", action.kind === "attack" ? "rgba(200,40,40,0.25)" : "rgba(40,120,220,0.25)");
      ring.setAttribute("stroke", action.kind === "attack" ? "#b03030" : "#1d4f9e");
      ring.setAttribute("stroke-dasharray", "4 3");
      ring.setAttribute("data-action-kind", action.kind);
      ring.setAttribute("data-target", `${col},${row}`);
      ring.addEventListener("click", () => handlers.onAction?.(action));
      svg.appendChild(ring);
    }

    for (const unit of state.units) {
      svg.appendChild(this.unitMarker(doc, unit, state, legal, selectedUnit, handlers));
    }

    this.root.replaceChildren(svg);
    this.svg = svg;
  }

  private unitMarker(
    doc: Document,
    unit: UnitPayload,
    state: StateDict,
    legal: Record<string, ActionPayload[]>,
    selectedUnit: number | null,
    handlers: BoardHandlers,
  ): SVGGElement {
    const g = doc.createElementNS(SVG_NS, "g") as SVGGElement;
    const { x, y } = hexCenter(this.layout, unit.col, unit.row);
    const s = this.layout.size;
    const w = s * 1.15;
    const h = s * 0.78;
    g.setAttribute("class", "unit");
    g.setAttribute("data-unit-id", String(unit.id));
    g.setAttribute("data-faction", unit.faction);
    g.setAttribute("data-kind", unit.kind);
    g.setAttribute("data-col", String(unit.col));
    g.setAttribute("data-row", String(unit.row));

    const frame = doc.createElementNS(SVG_NS, "rect");
    frame.setAttribute("x", String(x - w / 2));
    frame.setAttribute("y", String(y - h / 2));
    frame.setAttribute("width", String(w));
    frame.setAttribute("height", String(h));
    frame.setAttribute("fill", unit.faction === "blue" ? "#cfe0f7" : "#f3d2d2");
    frame.setAttribute("stroke", FACTION_STROKE[unit.faction]);
    frame.setAttribute("stroke-width", selectedUnit === unit.id ? "3" : "1.5");
    g.appendChild(frame);

    // simplified operational glyphs: infantry crossed lines, armor oval,
    // artillery filled dot
    const stroke = FACTION_STROKE[unit.faction];
    if (unit.kind === "infantry") {
      for (const sign of [1, -1]) {
        const line = doc.createElementNS(SVG_NS, "line");
        line.setAttribute("x1", String(x - w / 2));
        line.setAttribute("y1", String(y - (sign * h) / 2));
        line.setAttribute("x2", String(x + w / 2));
        line.setAttribute("y2", String(y + (sign * h) / 2));
        line.setAttribute("stroke", stroke);
        line.setAttribute("stroke-width", "1.5");
        g.appendChild(line);
      }
    } else if (unit.kind === "armor") {
      const oval = doc.createElementNS(SVG_NS, "ellipse");
      oval.setAttribute("cx", String(x));
      oval.setAttribute("cy", String(y));
      oval.setAttribute("rx", String(w * 0.3));
      oval.setAttribute("ry", String(h * 0.3));
      oval.setAttribute("fill", "none");
      oval.setAttribute("stroke", stroke);
      oval.setAttribute("stroke-width", "1.5");
      g.appendChild(oval);
    } else {
      const dot = doc.createElementNS(SVG_NS, "circle");
      dot.setAttribute("cx", String(x));
      dot.setAttribute("cy", String(y));
      dot.setAttribute("r", String(h * 0.18));
      dot.setAttribute("fill", stroke);
      g.appendChild(dot);
    }

    const label = doc.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(x));
    label.setAttribute("y", String(y + h));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("font-size", "9");
    label.textContent = String(Math.round(unit.strength));
    g.appendChild(label);

    // only on-move human units are selectable
    const selectable =
      unit.faction === "blue" && state.on_move === "blue" && String(unit.id) in legal;
    if (selectable) {
      g.setAttribute("data-selectable", "1");
      g.addEventListener("click", () => handlers.onSelectUnit?.(unit.id));
    }
    return g;
  }
}

export function domTerrainSet(root: HTMLElement): Set<string> {
  const out = new Set<string>();
  root.querySelectorAll("polygon[data-terrain]").forEach((el) => {
    out.add(`${el.getAttribute("data-col")},${el.getAttribute("data-row")}:${el.getAttribute("data-terrain")}`);
  });
  return out;
}

export function domUnitSet(root: HTMLElement): Set<string> {
  const out = new Set<string>();
  root.querySelectorAll("g.unit").forEach((el) => {
    out.add(
      `${el.getAttribute("data-unit-id")}:${el.getAttribute("data-faction")}:` +
        `${el.getAttribute("data-kind")}@${el.getAttribute("data-col")},${el.getAttribute("data-row")}`,
    );
  });
  return out;
}

export function payloadTerrainSet(state: StateDict): Set<string> {
  const terrain = decodeTerrain(state);
  const out = new Set<string>();
  for (let row = 0; row < state.height; row++) {
    for (let col = 0; col < state.width; col++) {
      out.add(`${col},${row}:${terrain[row * state.width + col]}`);
    }
  }
  return out;
}

export function payloadUnitSet(state: StateDict): Set<string> {
  return new Set(
    state.units.map((u) => `${u.id}:${u.faction}:${u.kind}@${u.col},${u.row}`),
  );
}
