/** SVG court rendering: 94x50 ft geometry, one polyline per trajectory. */

import type { PlayPayload } from "./types.js";
import type { SelectionState } from "./selection.js";

export const COURT_LENGTH = 94;
export const COURT_WIDTH = 50;

export const OFFENSE_COLOR = "#1f6fd6"; // blue
export const DEFENSE_COLOR = "#2e9e4f"; // green
export const BALL_COLOR = "#d63a2e"; // red

const SVG_NS = "http://www.w3.org/2000/svg";

export interface CourtOptions {
  scale?: number; // pixels per foot
  selection?: SelectionState; // when given, trajectories toggle on click
  interactive?: boolean;
}

function tokenOf(agentIndex: number, nOffense: number): string {
  return agentIndex < nOffense
    ? `o${agentIndex}`
    : `d${agentIndex - nOffense}`;
}

function polylinePoints(
  pts: Array<[number, number]>,
  scale: number,
): string {
  // the y axis flips so the court reads with y up
  return pts
    .map(([x, y]) => `${x * scale},${(COURT_WIDTH - y) * scale}`)
    .join(" ");
}

function trajectoryOf(play: PlayPayload, agent: number): Array<[number, number]> {
  return play.agents_xy.map((frame) => [frame[agent][0], frame[agent][1]]);
}

function ballTrajectory(play: PlayPayload): Array<[number, number]> {
  return play.ball_xyz.map((p) => [p[0], p[1]]);
}

function applySelectionStyle(el: SVGElement, selected: boolean): void {
  el.setAttribute("stroke-opacity", selected ? "1.0" : "0.25");
  el.setAttribute("stroke-width", selected ? "2.5" : "1.5");
  el.setAttribute("data-selected", selected ? "true" : "false");
}

/** Render a play into a fresh SVG element.
 *
 * One polyline per agent plus the ball, each tagged with its selection
 * token; a small circle marks every trajectory's end point.  With a
 * selection state attached, clicking a polyline toggles that trajectory
 * and the highlight follows the state.
 */
export function renderCourt(play: PlayPayload, options: CourtOptions = {}): SVGSVGElement {
  const scale = options.scale ?? 6;
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("width", String(COURT_LENGTH * scale));
  svg.setAttribute("height", String(COURT_WIDTH * scale));
  svg.setAttribute("viewBox", `0 0 ${COURT_LENGTH * scale} ${COURT_WIDTH * scale}`);
  svg.setAttribute("class", "court");

  const border = document.createElementNS(SVG_NS, "rect");
  border.setAttribute("x", "0");
  border.setAttribute("y", "0");
  border.setAttribute("width", String(COURT_LENGTH * scale));
  border.setAttribute("height", String(COURT_WIDTH * scale));
  border.setAttribute("fill", "#faf7f0");
  border.setAttribute("stroke", "#999");
  svg.appendChild(border);

  const midline = document.createElementNS(SVG_NS, "line");
  midline.setAttribute("x1", String((COURT_LENGTH / 2) * scale));
  midline.setAttribute("y1", "0");
  midline.setAttribute("x2", String((COURT_LENGTH / 2) * scale));
  midline.setAttribute("y2", String(COURT_WIDTH * scale));
  midline.setAttribute("stroke", "#ccc");
  svg.appendChild(midline);

  const frames = play.agents_xy.length;
  if (frames === 0) {
    const msg = document.createElementNS(SVG_NS, "text");
    msg.setAttribute("x", String((COURT_LENGTH / 2) * scale));
    msg.setAttribute("y", String((COURT_WIDTH / 2) * scale));
    msg.setAttribute("text-anchor", "middle");
    msg.setAttribute("class", "court-empty");
    msg.textContent = "no trajectory data";
    svg.appendChild(msg);
    return svg;
  }

  const nAgents = play.agents_xy[0].length;
  const entries: Array<{ token: string; pts: Array<[number, number]>; color: string }> = [];
  for (let a = 0; a < nAgents; a++) {
    entries.push({
      token: tokenOf(a, play.n_offense),
      pts: trajectoryOf(play, a),
      color: a < play.n_offense ? OFFENSE_COLOR : DEFENSE_COLOR,
    });
  }
  entries.push({ token: "ball", pts: ballTrajectory(play), color: BALL_COLOR });

  for (const { token, pts, color } of entries) {
    const line = document.createElementNS(SVG_NS, "polyline");
    line.setAttribute("points", polylinePoints(pts, scale));
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", color);
    line.setAttribute("data-token", token);
    line.setAttribute("class", "trajectory");

    const [ex, ey] = pts[pts.length - 1];
    const end = document.createElementNS(SVG_NS, "circle");
    end.setAttribute("cx", String(ex * scale));
    end.setAttribute("cy", String((COURT_WIDTH - ey) * scale));
    end.setAttribute("r", String(0.6 * scale));
    end.setAttribute("fill", color);
    end.setAttribute("class", "endpoint");
    end.setAttribute("data-token", token);

    const selection = options.selection;
    applySelectionStyle(line, selection ? selection.isSelected(token) : true);
    if (selection && (options.interactive ?? true)) {
      line.style.cursor = "pointer";
      const onClick = () => {
        selection.toggle(token);
      };
      line.addEventListener("click", onClick);
      end.addEventListener("click", onClick);
      selection.onChange(() => {
        applySelectionStyle(line, selection.isSelected(token));
      });
    }
    svg.appendChild(line);
    svg.appendChild(end);
  }
  return svg;
}

/** Tokens of the currently highlighted polylines inside a rendered court. */
export function highlightedTokens(svg: SVGSVGElement): string[] {
  return Array.from(
    svg.querySelectorAll('polyline.trajectory[data-selected="true"]'),
  ).map((el) => el.getAttribute("data-token") ?? "");
}
