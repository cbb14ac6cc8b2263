/** Token-boundary detection for annotate-all: mirrors the service's
 * tokenizer (letter/digit runs, digit-flanked dots stay inside a run,
 * other marks are single tokens). The server remains the authority; this
 * only decides which occurrences are worth submitting. */

const ALNUM = /[\p{L}\p{N}]/u;

function isDigit(ch: string): boolean {
  return ch >= "0" && ch <= "9";
}

export function tokenBoundaries(text: string): { starts: Set<number>; ends: Set<number> } {
  const starts = new Set<number>();
  const ends = new Set<number>();
  let i = 0;
  const n = text.length;
  while (i < n) {
    const ch = text[i];
    if (/\s/.test(ch)) {
      i += 1;
      continue;
    }
    if (ALNUM.test(ch)) {
      let j = i + 1;
      while (j < n) {
        if (ALNUM.test(text[j])) j += 1;
        else if (text[j] === "." && j + 1 < n && isDigit(text[j - 1]) && isDigit(text[j + 1])) j += 1;
        else break;
      }
      starts.add(i);
      ends.add(j);
      i = j;
    } else {
      starts.add(i);
      ends.add(i + 1);
      i += 1;
    }
  }
  return { starts, ends };
}

/** Case-sensitive, token-aligned occurrences of `surface` in `text`. */
export function findOccurrences(text: string, surface: string): Array<{ start: number; end: number }> {
  if (!surface) return [];
  const { starts, ends } = tokenBoundaries(text);
  const found: Array<{ start: number; end: number }> = [];
  let pos = text.indexOf(surface);
  while (pos !== -1) {
    const end = pos + surface.length;
    if (starts.has(pos) && ends.has(end)) found.push({ start: pos, end });
    pos = text.indexOf(surface, pos + 1);
  }
  return found;
}
