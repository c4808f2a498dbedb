import { ApiClient } from "./api.js";
import { App } from "./app.js";

// The API base can be pointed elsewhere with ?api=http://host:port;
// default assumes the service runs on its usual local port.
const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? "http://localhost:8000";

const root = document.getElementById("app");
if (root) {
  const app = new App(new ApiClient(base), root);
  void app.boot();
}
