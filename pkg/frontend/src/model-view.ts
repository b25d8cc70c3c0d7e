// Model upload with progress. Uses XHR for upload progress events; the
// endpoint and error contract match api.uploadModel exactly.

export class ModelView {
  private root: HTMLElement;
  private progress: HTMLProgressElement;
  private message: HTMLElement;

  constructor(root: HTMLElement) {
    this.root = root;
    this.progress = document.createElement("progress");
    this.progress.max = 100;
    this.progress.value = 0;
    this.message = document.createElement("div");
    this.message.className = "upload-message";
    this.render();
  }

  private render(): void {
    const picker = document.createElement("input");
    picker.type = "file";
    picker.accept = ".mdrn";
    const button = document.createElement("button");
    button.textContent = "Upload and swap in";
    button.onclick = () => {
      const file = picker.files?.[0];
      if (!file) {
        this.show("pick a .mdrn weight file first", true);
        return;
      }
      this.upload(file);
    };
    this.root.append(picker, button, this.progress, this.message);
  }

  private show(text: string, isError: boolean): void {
    this.message.textContent = text;
    this.message.classList.toggle("error", isError);
  }

  private upload(file: File): void {
    const xhr = new XMLHttpRequest();
    xhr.open("POST", "/api/model");
    xhr.upload.onprogress = (event) => {
      if (event.lengthComputable) {
        this.progress.value = (event.loaded / event.total) * 100;
      }
    };
    xhr.onload = () => {
      if (xhr.status === 200) {
        const body = JSON.parse(xhr.responseText);
        this.show(`now running ${body.model_name} (dimension ${body.dimension})`, false);
      } else {
        let detail = `HTTP ${xhr.status}`;
        try {
          const body = JSON.parse(xhr.responseText);
          if (Array.isArray(body.violations)) detail = body.violations.join("; ");
        } catch {
          // keep the status line
        }
        this.show(`rejected: ${detail}`, true);
      }
    };
    xhr.onerror = () => this.show("upload failed: network error", true);
    const form = new FormData();
    form.append("file", file, file.name);
    xhr.send(form);
  }
}
