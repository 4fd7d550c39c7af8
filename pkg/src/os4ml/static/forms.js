// Prediction-playground form model, generated from the databag schema:
// number -> numeric field, category -> dropdown of the vocabulary,
// binary -> toggle, text -> textarea.
const BINARY_FAMILIES = [
    ["1", "0"],
    ["true", "false"],
    ["yes", "no"],
];
export function binaryTokens(vocabulary) {
    const seen = Object.keys(vocabulary ?? {});
    if (seen.length === 0)
        return ["yes", "no"];
    const lowered = new Set(seen.map((v) => v.toLowerCase()));
    for (const [pos, neg] of BINARY_FAMILIES) {
        if ([...lowered].every((v) => v === pos || v === neg)) {
            const positive = seen.find((v) => v.toLowerCase() === pos) ?? pos;
            const negative = seen.find((v) => v.toLowerCase() === neg) ?? neg;
            return [positive, negative];
        }
    }
    return ["yes", "no"];
}
export function buildFields(databag, target) {
    return databag.columns
        .filter((col) => col.name !== target)
        .map((col) => fieldFor(col));
}
function fieldFor(col) {
    switch (col.detected_type) {
        case "number":
            return { name: col.name, kind: "number", options: [] };
        case "category":
            return {
                name: col.name,
                kind: "category",
                options: Object.keys(col.stats?.vocabulary ?? {}),
            };
        case "binary":
            return { name: col.name, kind: "binary", options: [...binaryTokens(col.stats?.vocabulary)] };
        default:
            return { name: col.name, kind: "text", options: [] };
    }
}
// raw values come straight from form controls (strings, or boolean for toggles)
export function collectRow(fields, values) {
    const row = {};
    const errors = {};
    for (const field of fields) {
        const raw = values[field.name];
        if (field.kind === "number") {
            const text = String(raw ?? "").trim();
            if (!text) {
                errors[field.name] = "required";
                continue;
            }
            const num = Number(text);
            if (!Number.isFinite(num)) {
                errors[field.name] = "must be a number";
                continue;
            }
            row[field.name] = num;
        }
        else if (field.kind === "binary") {
            row[field.name] = raw === true || raw === field.options[0] ? field.options[0] : field.options[1];
        }
        else if (field.kind === "category") {
            row[field.name] = String(raw ?? field.options[0] ?? "");
        }
        else {
            row[field.name] = String(raw ?? "");
        }
    }
    return { row, errors };
}
