// Minimal observable store; state is replaced, never mutated in place.
export interface Store<T> {
  get(): T;
  set(next: T): void;
  subscribe(fn: (value: T) => void): () => void;
}

export function createStore<T>(initial: T): Store<T> {
  let value = initial;
  const listeners = new Set<(value: T) => void>();
  return {
    get: () => value,
    set(next: T) {
      value = next;
      for (const fn of listeners) fn(value);
    },
    subscribe(fn: (value: T) => void) {
      listeners.add(fn);
      return () => listeners.delete(fn);
    },
  };
}
