/** Ranked result gallery: thumbnails in service order, never re-sorted. */

import { renderCourt } from "./court.js";
import type { RankedItem } from "./types.js";

export interface GalleryOptions {
  label?: string; // method label for side-by-side panels
  thumbnailScale?: number;
  onPromote?: (item: RankedItem) => void; // click -> new exemplar
}

/** Render results into a container, preserving the response order. */
export function renderGallery(
  container: HTMLElement,
  results: RankedItem[],
  options: GalleryOptions = {},
): void {
  container.replaceChildren();
  container.classList.add("gallery");
  if (options.label) {
    const heading = document.createElement("h3");
    heading.textContent = options.label;
    heading.className = "gallery-label";
    container.appendChild(heading);
  }
  const list = document.createElement("ol");
  list.className = "gallery-list";
  for (const item of results) {
    const entry = document.createElement("li");
    entry.className = "gallery-item";
    entry.dataset.playId = item.play_id;
    entry.dataset.rank = String(item.rank);

    const thumb = renderCourt(item.play, {
      scale: options.thumbnailScale ?? 2,
      interactive: false,
    });
    entry.appendChild(thumb);

    const caption = document.createElement("div");
    caption.className = "gallery-caption";
    caption.textContent = `#${item.rank} ${item.play_id} d=${item.distance.toFixed(2)}`;
    entry.appendChild(caption);

    if (options.onPromote) {
      entry.style.cursor = "pointer";
      entry.addEventListener("click", () => options.onPromote?.(item));
    }
    list.appendChild(entry);
  }
  container.appendChild(list);
}

/** Play ids currently shown, in display order. */
export function galleryOrder(container: HTMLElement): string[] {
  return Array.from(container.querySelectorAll("li.gallery-item")).map(
    (el) => (el as HTMLElement).dataset.playId ?? "",
  );
}
