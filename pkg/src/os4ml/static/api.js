// Thin REST client. Every platform interaction goes through these calls;
// the UI has no privileged channel.
export class ApiError extends Error {
    status;
    code;
    details;
    constructor(status, code, message, details = []) {
        super(message);
        this.status = status;
        this.code = code;
        this.details = details;
    }
}
export class ApiClient {
    baseUrl;
    token;
    fetchImpl;
    constructor(baseUrl, token, fetchImpl = (...args) => fetch(...args)) {
        this.baseUrl = baseUrl;
        this.token = token;
        this.fetchImpl = fetchImpl;
    }
    async request(method, path, body, form) {
        const headers = { Authorization: `Bearer ${this.token}` };
        let payload;
        if (form) {
            payload = form;
        }
        else if (body !== undefined) {
            headers["Content-Type"] = "application/json";
            payload = JSON.stringify(body);
        }
        const resp = await this.fetchImpl(`${this.baseUrl}${path}`, { method, headers, body: payload });
        if (resp.status === 204)
            return undefined;
        const text = await resp.text();
        let parsed = null;
        try {
            parsed = text ? JSON.parse(text) : null;
        }
        catch {
            parsed = null;
        }
        if (!resp.ok) {
            const err = (parsed ?? {});
            throw new ApiError(resp.status, err.code ?? "error", err.message ?? resp.statusText, err.details ?? []);
        }
        return parsed;
    }
    health() {
        return this.request("GET", "/healthz");
    }
    listDatabags() {
        return this.request("GET", "/api/v1/databags");
    }
    uploadDatabag(name, file) {
        const form = new FormData();
        form.append("name", name);
        form.append("file", file, file.name || "upload.csv");
        return this.request("POST", "/api/v1/databags", undefined, form);
    }
    getDatabag(id) {
        return this.request("GET", `/api/v1/databags/${id}`);
    }
    deleteDatabag(id) {
        return this.request("DELETE", `/api/v1/databags/${id}`);
    }
    createSolution(req) {
        return this.request("POST", "/api/v1/solutions", req);
    }
    listSolutions() {
        return this.request("GET", "/api/v1/solutions");
    }
    getSolution(id) {
        return this.request("GET", `/api/v1/solutions/${id}`);
    }
    getRun(id) {
        return this.request("GET", `/api/v1/runs/${id}`);
    }
    predict(solutionId, rows) {
        return this.request("POST", `/api/v1/solutions/${solutionId}/predict`, { rows });
    }
    modelUrl(solutionId) {
        return `${this.baseUrl}/api/v1/solutions/${solutionId}/model`;
    }
}
