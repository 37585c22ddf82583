/**
 * Masked-text highlighting helpers.
 *
 * Splits a masked document into typed segments so the renderer can flag
 * mask tokens and digit-deletion residue (stranded separators such as
 * "//" or "-" left behind where a date or phone number used to be).
 * Pure string logic, no DOM here.
 */

export const MASK_TOKEN = "[Entidad]";

export type SegmentKind = "text" | "mask" | "residue";

export interface Segment {
  kind: SegmentKind;
  text: string;
}

// Separator clusters that usually remain after digit runs were deleted:
// two or more of / - . : together, or a lone separator between spaces.
const RESIDUE = /(?:^|\s)([/\-.:]{1,})(?=\s|$)/g;

function pushText(segments: Segment[], text: string): void {
  if (text.length === 0) return;
  const last = segments[segments.length - 1];
  if (last !== undefined && last.kind === "text") {
    last.text += text;
  } else {
    segments.push({ kind: "text", text });
  }
}

/** Mark every whitespace-delimited run made only of / - . : as residue. */
function splitResidue(segments: Segment[], chunk: string): void {
  let cursor = 0;
  for (const match of chunk.matchAll(RESIDUE)) {
    const sep = match[1];
    const start = (match.index ?? 0) + match[0].indexOf(sep);
    pushText(segments, chunk.slice(cursor, start));
    segments.push({ kind: "residue", text: sep });
    cursor = start + sep.length;
  }
  pushText(segments, chunk.slice(cursor));
}

/** Split a masked document into text / mask / residue segments. */
export function segmentMaskedText(text: string): Segment[] {
  const segments: Segment[] = [];
  let cursor = 0;
  while (cursor < text.length) {
    const at = text.indexOf(MASK_TOKEN, cursor);
    if (at === -1) {
      splitResidue(segments, text.slice(cursor));
      break;
    }
    splitResidue(segments, text.slice(cursor, at));
    segments.push({ kind: "mask", text: MASK_TOKEN });
    cursor = at + MASK_TOKEN.length;
  }
  return segments;
}

export function maskCount(text: string): number {
  return segmentMaskedText(text).filter((s) => s.kind === "mask").length;
}

export function residueCount(text: string): number {
  return segmentMaskedText(text).filter((s) => s.kind === "residue").length;
}
