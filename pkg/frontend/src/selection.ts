/** Trajectory subset selection state for the current exemplar. */

export class SelectionState {
  private chosen: Set<string>;
  private listeners: Array<(selected: string[]) => void> = [];

  constructor(private tokens: string[], initiallyAll = true) {
    this.chosen = new Set(initiallyAll ? tokens : []);
  }

  /** Tokens in canonical order (offense, defense, ball). */
  all(): string[] {
    return [...this.tokens];
  }

  selected(): string[] {
    return this.tokens.filter((t) => this.chosen.has(t));
  }

  isSelected(token: string): boolean {
    return this.chosen.has(token);
  }

  toggle(token: string): boolean {
    if (!this.tokens.includes(token)) {
      throw new Error(`unknown trajectory token ${token}`);
    }
    if (this.chosen.has(token)) this.chosen.delete(token);
    else this.chosen.add(token);
    this.emit();
    return this.chosen.has(token);
  }

  selectAll(): void {
    this.chosen = new Set(this.tokens);
    this.emit();
  }

  clear(): void {
    this.chosen.clear();
    this.emit();
  }

  /** Reset for a new exemplar, keeping nothing from the previous one. */
  reset(tokens: string[], initiallyAll = true): void {
    this.tokens = tokens;
    this.chosen = new Set(initiallyAll ? tokens : []);
    this.emit();
  }

  onChange(fn: (selected: string[]) => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    const snapshot = this.selected();
    for (const fn of this.listeners) fn(snapshot);
  }
}
