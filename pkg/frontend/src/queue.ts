import { ApiRow, Progress } from "./types.js";

/** Client-side queue over the server's rows.
 *
 * Ambiguous cards (two or more distinct concepts offered) come first so
 * curator attention lands where mapping errors live; ties keep a stable
 * class-IRI order. Candidates inside a card are never re-ranked. The queue
 * holds no truth of its own: it is rebuilt from the server on every load,
 * and a resolved card is only removed after the server confirmed the
 * decision.
 */
export class ReviewQueue {
  private rows: ApiRow[] = [];
  private cursor = 0;

  load(rows: ApiRow[]): void {
    this.rows = rows
      .filter((row) => row.status === "unresolved")
      .sort((a, b) => {
        if (a.ambiguous !== b.ambiguous) {
          return a.ambiguous ? -1 : 1;
        }
        return a.class_iri < b.class_iri ? -1 : a.class_iri > b.class_iri ? 1 : 0;
      });
    this.cursor = 0;
  }

  get pending(): readonly ApiRow[] {
    return this.rows;
  }

  get size(): number {
    return this.rows.length;
  }

  get current(): ApiRow | null {
    return this.rows[this.cursor] ?? null;
  }

  get currentIndex(): number {
    return this.cursor;
  }

  next(): void {
    if (this.rows.length > 0) {
      this.cursor = (this.cursor + 1) % this.rows.length;
    }
  }

  previous(): void {
    if (this.rows.length > 0) {
      this.cursor = (this.cursor - 1 + this.rows.length) % this.rows.length;
    }
  }

  focus(classIri: string): void {
    const index = this.rows.findIndex((row) => row.class_iri === classIri);
    if (index >= 0) {
      this.cursor = index;
    }
  }

  /** Drop a confirmed card, keeping the cursor on the following one. */
  remove(classIri: string): void {
    const index = this.rows.findIndex((row) => row.class_iri === classIri);
    if (index < 0) {
      return;
    }
    this.rows.splice(index, 1);
    if (index < this.cursor) {
      this.cursor -= 1;
    }
    if (this.cursor >= this.rows.length) {
      this.cursor = Math.max(0, this.rows.length - 1);
    }
  }
}

export function percentResolved(progress: Progress): number {
  if (progress.total === 0) {
    return 100;
  }
  return Math.round(((progress.accepted + progress.rejected) / progress.total) * 100);
}
