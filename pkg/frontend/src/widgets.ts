// One functional DOM control per widget class. Every interaction builds a
// predicate covering ALL attributes of each relationship the widget
// sources, so emitted events always satisfy the log's coverage rule.
// Continuous widgets (slider, hover, panning, brush, zooms) are debounced;
// interval 0 re-creates the raw per-pixel event stream.

import { debounce } from './debounce.js';
import { andOf, domainRange, domainValues } from './predicates.js';
import type {
  AttributeRef,
  DatabaseSpec,
  Domains,
  Predicate,
  FieldPredicate,
  RelationshipSpec,
  WidgetSpec,
} from './types.js';

export interface WidgetContext {
  widget: WidgetSpec;
  relationships: RelationshipSpec[]; // relationships sourced at this widget
  domains: Domains;
  db: DatabaseSpec | null;
  emit: (relationship: string, parameters: Predicate) => void;
  debounceMs: number;
}

const CONTINUOUS = new Set(['slider', 'hover', 'panning', 'brush', 'zoom_qualitative', 'zoom_quantitative']);

function kindOf(db: DatabaseSpec | null, ref: AttributeRef): 'numerical' | 'categorical' {
  return db?.tables[ref.table]?.[ref.attribute] ?? 'categorical';
}

export function renderWidget(ctx: WidgetContext): HTMLElement {
  const root = document.createElement('div');
  root.className = `widget widget-${ctx.widget.widget_class}`;
  root.dataset.widget = ctx.widget.name;
  const title = document.createElement('h3');
  title.textContent = `${ctx.widget.name} (${ctx.widget.widget_class})`;
  root.appendChild(title);

  // current per-attribute predicate; initialized to full coverage so any
  // single-control change still yields a complete parameter set
  const state = new Map<string, FieldPredicate>();
  for (const ref of ctx.widget.attribute) {
    if (kindOf(ctx.db, ref) === 'numerical') {
      const [lo, hi] = domainRange(ctx.domains, ref);
      state.set(ref.attribute, { field: ref.attribute, range: [lo, hi] });
    } else {
      const values = domainValues(ctx.domains, ref);
      state.set(
        ref.attribute,
        values.length > 0
          ? { field: ref.attribute, equal: values[0] }
          : { field: ref.attribute, valid: true },
      );
    }
  }

  const emitAll = (): void => {
    for (const rel of ctx.relationships) {
      const parts = rel.attribute.map((ref) => state.get(ref.attribute));
      if (parts.some((p) => p === undefined)) continue;
      ctx.emit(rel.name, andOf(parts as Predicate[]));
    }
  };
  const debounced = debounce<void>(CONTINUOUS.has(ctx.widget.widget_class) ? ctx.debounceMs : 0, emitAll);
  const commit = (): void => debounced.push(undefined as void);

  const body = buildControl(ctx, state, commit);
  if (body === null) {
    const placeholder = document.createElement('div');
    placeholder.className = 'widget-unsupported';
    placeholder.textContent = `unsupported widget class: ${ctx.widget.widget_class}`;
    root.appendChild(placeholder);
    return root;
  }
  root.appendChild(body);
  return root;
}

function buildControl(
  ctx: WidgetContext,
  state: Map<string, FieldPredicate>,
  commit: () => void,
): HTMLElement | null {
  const { widget, domains, db } = ctx;
  const primary = widget.attribute[0];
  switch (widget.widget_class) {
    case 'radio_button': {
      if (!primary) return null;
      const wrap = document.createElement('div');
      for (const value of domainValues(domains, primary)) {
        const label = document.createElement('label');
        const input = document.createElement('input');
        input.type = 'radio';
        input.name = `${widget.name}-${primary.attribute}`;
        input.value = String(value);
        input.addEventListener('change', () => {
          state.set(primary.attribute, { field: primary.attribute, equal: value });
          commit();
        });
        label.appendChild(input);
        label.appendChild(document.createTextNode(String(value)));
        wrap.appendChild(label);
      }
      return wrap;
    }

    case 'checkbox': {
      if (!primary) return null;
      const wrap = document.createElement('div');
      const checked = new Set<string | number>();
      for (const value of domainValues(domains, primary)) {
        const label = document.createElement('label');
        const input = document.createElement('input');
        input.type = 'checkbox';
        input.value = String(value);
        input.addEventListener('change', () => {
          if (input.checked) checked.add(value);
          else checked.delete(value);
          if (checked.size === 0) return; // empty oneOf is not a valid predicate
          state.set(primary.attribute, { field: primary.attribute, oneOf: [...checked] });
          commit();
        });
        label.appendChild(input);
        label.appendChild(document.createTextNode(String(value)));
        wrap.appendChild(label);
      }
      return wrap;
    }

    case 'list_box': {
      if (!primary) return null;
      const select = document.createElement('select');
      select.multiple = true;
      select.size = 4;
      for (const value of domainValues(domains, primary)) {
        const option = document.createElement('option');
        option.value = String(value);
        option.textContent = String(value);
        select.appendChild(option);
      }
      const values = domainValues(domains, primary);
      select.addEventListener('change', () => {
        const picked = [...select.selectedOptions].map((o) =>
          values.find((v) => String(v) === o.value) ?? o.value,
        );
        if (picked.length === 0) return;
        state.set(primary.attribute, { field: primary.attribute, oneOf: picked });
        commit();
      });
      return select;
    }

    case 'dropdown_list': {
      if (!primary) return null;
      const select = document.createElement('select');
      const values = domainValues(domains, primary);
      for (const value of values) {
        const option = document.createElement('option');
        option.value = String(value);
        option.textContent = String(value);
        select.appendChild(option);
      }
      select.addEventListener('change', () => {
        const value = values.find((v) => String(v) === select.value) ?? select.value;
        state.set(primary.attribute, { field: primary.attribute, equal: value });
        commit();
      });
      return select;
    }

    case 'textbox': {
      if (!primary) return null;
      const wrap = document.createElement('div');
      const input = document.createElement('input');
      input.type = 'text';
      input.placeholder = primary.attribute;
      const apply = (): void => {
        const numeric = kindOf(db, primary) === 'numerical';
        let value: string | number = input.value;
        if (numeric) {
          value = Number(input.value);
          if (!Number.isFinite(value)) return;
        }
        if (input.value === '') return;
        state.set(primary.attribute, { field: primary.attribute, equal: value });
        commit();
      };
      input.addEventListener('keydown', (e) => {
        if ((e as KeyboardEvent).key === 'Enter') apply();
      });
      const go = document.createElement('button');
      go.textContent = 'apply';
      go.addEventListener('click', apply);
      wrap.appendChild(input);
      wrap.appendChild(go);
      return wrap;
    }

    case 'numeric_incrementer': {
      if (!primary) return null;
      const wrap = document.createElement('div');
      const [lo, hi] = domainRange(domains, primary);
      const step = (hi - lo) / 20 || 1;
      let value = lo;
      const display = document.createElement('span');
      display.textContent = String(value);
      const make = (label: string, delta: number): HTMLButtonElement => {
        const b = document.createElement('button');
        b.textContent = label;
        b.addEventListener('click', () => {
          value = Math.min(hi, Math.max(lo, value + delta));
          display.textContent = String(value);
          state.set(primary.attribute, { field: primary.attribute, equal: value });
          commit();
        });
        return b;
      };
      wrap.appendChild(make('-', -step));
      wrap.appendChild(display);
      wrap.appendChild(make('+', step));
      return wrap;
    }

    case 'next_button': {
      if (!primary) return null;
      const values = domainValues(domains, primary);
      const button = document.createElement('button');
      button.textContent = 'next';
      let index = 0;
      button.addEventListener('click', () => {
        if (values.length === 0) return;
        index = (index + 1) % values.length;
        state.set(primary.attribute, { field: primary.attribute, equal: values[index] });
        commit();
      });
      return button;
    }

    case 'slider': {
      if (!primary) return null;
      const [lo, hi] = domainRange(domains, primary);
      const input = document.createElement('input');
      input.type = 'range';
      input.min = String(lo);
      input.max = String(hi);
      input.step = String((hi - lo) / 100 || 1);
      input.value = String(hi);
      input.addEventListener('input', () => {
        const value = Number(input.value);
        state.set(primary.attribute, { field: primary.attribute, range: [lo, value] });
        commit();
      });
      return input;
    }

    case 'hover': {
      if (!primary) return null;
      const wrap = document.createElement('div');
      wrap.className = 'hover-region';
      for (const value of domainValues(domains, primary)) {
        const cell = document.createElement('span');
        cell.className = 'hover-cell';
        cell.textContent = String(value);
        cell.addEventListener('mouseover', () => {
          state.set(primary.attribute, { field: primary.attribute, equal: value });
          commit();
        });
        wrap.appendChild(cell);
      }
      return wrap;
    }

    case 'panning': {
      if (!primary) return null;
      const region = document.createElement('div');
      region.className = 'pan-region';
      const [lo, hi] = domainRange(domains, primary);
      const span = hi - lo;
      const window = span * 0.2 || 1;
      let start = lo;
      let dragging = false;
      let lastX = 0;
      region.addEventListener('mousedown', (e) => {
        dragging = true;
        lastX = (e as MouseEvent).clientX;
      });
      region.addEventListener('mousemove', (e) => {
        if (!dragging) return;
        const me = e as MouseEvent;
        const width = region.getBoundingClientRect().width || 200;
        const dx = me.clientX - lastX;
        lastX = me.clientX;
        start = Math.min(hi - window, Math.max(lo, start + (dx / width) * span));
        state.set(primary.attribute, { field: primary.attribute, range: [start, start + window] });
        commit();
      });
      region.addEventListener('mouseup', () => {
        dragging = false;
      });
      return region;
    }

    case 'brush': {
      const region = document.createElement('div');
      region.className = 'brush-region';
      const xRef = widget.attribute[0];
      const yRef = widget.attribute[1];
      if (!xRef) return null;
      let anchor: { x: number; y: number } | null = null;
      const applyRect = (x0: number, y0: number, x1: number, y1: number): void => {
        const rect = region.getBoundingClientRect();
        const width = rect.width || 200;
        const height = rect.height || 200;
        const [xlo, xhi] = domainRange(domains, xRef);
        const fx = (px: number): number => xlo + (Math.min(Math.max(px - rect.left, 0), width) / width) * (xhi - xlo);
        const xa = fx(Math.min(x0, x1));
        const xb = fx(Math.max(x0, x1));
        state.set(xRef.attribute, { field: xRef.attribute, range: [xa, xb] });
        if (yRef) {
          const [ylo, yhi] = domainRange(domains, yRef);
          // screen y grows downward; domain y grows upward
          const fy = (py: number): number =>
            ylo + ((height - Math.min(Math.max(py - rect.top, 0), height)) / height) * (yhi - ylo);
          const ya = fy(Math.max(y0, y1));
          const yb = fy(Math.min(y0, y1));
          state.set(yRef.attribute, { field: yRef.attribute, range: [ya, yb] });
        }
        commit();
      };
      region.addEventListener('mousedown', (e) => {
        const me = e as MouseEvent;
        anchor = { x: me.clientX, y: me.clientY };
      });
      region.addEventListener('mousemove', (e) => {
        if (!anchor) return;
        const me = e as MouseEvent;
        applyRect(anchor.x, anchor.y, me.clientX, me.clientY);
      });
      region.addEventListener('mouseup', (e) => {
        if (!anchor) return;
        const me = e as MouseEvent;
        applyRect(anchor.x, anchor.y, me.clientX, me.clientY);
        anchor = null;
      });
      return region;
    }

    case 'zoom_quantitative': {
      if (!primary) return null;
      const region = document.createElement('div');
      region.className = 'zoom-region';
      const [lo, hi] = domainRange(domains, primary);
      let curLo = lo;
      let curHi = hi;
      region.addEventListener('wheel', (e) => {
        const we = e as WheelEvent;
        const factor = we.deltaY < 0 ? 0.8 : 1.25;
        const center = (curLo + curHi) / 2;
        const half = ((curHi - curLo) / 2) * factor;
        curLo = Math.max(lo, center - half);
        curHi = Math.min(hi, center + half);
        state.set(primary.attribute, { field: primary.attribute, range: [curLo, curHi] });
        commit();
      });
      return region;
    }

    case 'zoom_qualitative': {
      if (!primary) return null;
      const region = document.createElement('div');
      region.className = 'zoom-region';
      const values = domainValues(domains, primary);
      let keep = values.length;
      region.addEventListener('wheel', (e) => {
        if (values.length === 0) return;
        const we = e as WheelEvent;
        keep = we.deltaY < 0 ? Math.max(1, Math.ceil(keep / 2)) : Math.min(values.length, keep * 2);
        state.set(primary.attribute, { field: primary.attribute, oneOf: values.slice(0, keep) });
        commit();
      });
      return region;
    }

    default:
      return null;
  }
}
